#include <doctest.h>

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "hlamkit/engine.hpp"
#include "hlamkit/errors.hpp"
#include "hlamkit/fabric.hpp"
#include "hlamkit/runtime.hpp"

using namespace hlamkit;

namespace {

int count_kind(const TraceLog& t, EventKind k, int iter = -1) {
  int n = 0;
  for (const TraceEvent& e : t.events)
    if (e.kind == k && (iter < 0 || e.iter == iter)) ++n;
  return n;
}

// Two simulated ranks on a 4x4x8 grid, each running `fn` on its own thread.
template <typename Fn>
std::vector<TraceLog> two_rank_run(Backend backend, int workers, Fn fn,
                                   std::chrono::nanoseconds timeout =
                                       std::chrono::seconds(10)) {
  const GridSpec g{4, 4, 8, Stencil::Seven};
  const LinearSystem sys = generate(g);
  const RankPlan plan = plan_ranks(g, 2);
  std::vector<LocalSystem> locals;
  std::vector<TaskPlan> tplans;
  for (int r = 0; r < 2; ++r) {
    locals.push_back(build_local_system(sys, plan, r));
    tplans.push_back(plan_tasks(locals[r].matrix, 4, 8));
  }
  Fabric fabric(2, timeout);
  auto clock = Tracer::make_clock();
  std::vector<TraceLog> traces(2);
  std::vector<std::exception_ptr> errors(2);
  auto body = [&](int r) {
    try {
      Engine::Setup setup;
      setup.backend = backend;
      setup.workers = workers;
      setup.system = &locals[r];
      setup.slab = &plan.ranks[r];
      setup.tasks = &tplans[r];
      setup.fabric = &fabric;
      setup.rank = r;
      setup.clock = clock;
      Engine eng(setup);
      fn(eng, r, locals[r]);
      eng.drain();
      traces[r] = eng.take_trace();
    } catch (...) {
      errors[r] = std::current_exception();
      fabric.poison("test rank failed");
    }
  };
  std::thread t0(body, 0), t1(body, 1);
  t0.join();
  t1.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

}  // namespace

TEST_CASE("run_graph: independent tasks equal sequential execution") {
  std::vector<double> data(16, 1.0);
  auto make_nodes = [&] {
    std::vector<TaskNode> nodes;
    for (int i = 0; i < 2; ++i) {
      TaskNode n;
      n.label = "axpby";
      n.reads = {};
      n.writes = {{1, i * 8, 8}};
      n.body = [&data, i](TaskContext&) {
        for (int k = 0; k < 8; ++k) data[i * 8 + k] *= 2.0;
      };
      nodes.push_back(std::move(n));
    }
    return nodes;
  };
  for (Backend b : {Backend::Sequential, Backend::ForkJoin,
                    Backend::TaskGraph}) {
    std::fill(data.begin(), data.end(), 1.0);
    const TraceLog t = run_graph(b, make_nodes(), 2);
    CHECK(data == std::vector<double>(16, 2.0));
    CHECK(count_kind(t, EventKind::Compute) == 2);
  }
}

TEST_CASE("run_graph: write-read conflicts execute in submission order") {
  std::vector<int> order;
  std::mutex mu;
  std::vector<TaskNode> nodes;
  for (int i = 0; i < 6; ++i) {
    TaskNode n;
    n.label = "chain";
    // Every task reads and writes the same region: a strict chain.
    n.reads = {{7, 0, 4}};
    n.writes = {{7, 0, 4}};
    n.body = [&, i](TaskContext&) {
      std::this_thread::sleep_for(std::chrono::microseconds(200 * (6 - i)));
      std::lock_guard lk(mu);
      order.push_back(i);
    };
    nodes.push_back(std::move(n));
  }
  run_graph(Backend::TaskGraph, std::move(nodes), 4);
  CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("run_graph: forward explicit dependency is a scheduling error") {
  std::vector<TaskNode> nodes;
  TaskNode n;
  n.after = {5};  // unsubmitted id: would form a cycle
  n.body = [](TaskContext&) {};
  nodes.push_back(std::move(n));
  CHECK_THROWS_AS(run_graph(Backend::TaskGraph, std::move(nodes), 1),
                  SchedulingError);
}

TEST_CASE("run_graph: relaxed writers race and readers order after them") {
  std::atomic<int> sum{0};
  std::vector<TaskNode> nodes;
  for (int i = 0; i < 8; ++i) {
    TaskNode n;
    n.label = "relaxed";
    n.relaxed_writes = true;
    n.writes = {{3, 0, 64}};
    n.body = [&sum](TaskContext&) {
      sum.fetch_add(1, std::memory_order_relaxed);
    };
    nodes.push_back(std::move(n));
  }
  int seen = -1;
  TaskNode reader;
  reader.label = "reader";
  reader.reads = {{3, 0, 64}};
  reader.body = [&](TaskContext&) { seen = sum.load(); };
  nodes.push_back(std::move(reader));
  run_graph(Backend::TaskGraph, std::move(nodes), 4);
  CHECK(seen == 8);  // reader waited for every relaxed writer
}

TEST_CASE("fabric: blocking allreduce sums in ascending rank order") {
  for (int ranks : {1, 4}) {
    Fabric fabric(ranks, std::chrono::seconds(5));
    std::vector<std::thread> threads;
    std::vector<double> results(ranks, 0.0);
    for (int r = 0; r < ranks; ++r)
      threads.emplace_back([&, r] {
        const double v[] = {static_cast<double>(r), 1.0};
        results[r] = fabric.allreduce_blocking(r, 0, v)[0];
      });
    for (auto& t : threads) t.join();
    for (int r = 0; r < ranks; ++r)
      CHECK(results[r] == ranks * (ranks - 1) / 2.0);
  }
}

TEST_CASE("fabric: repeated reductions are bit-identical") {
  auto run_once = [&] {
    Fabric fabric(3, std::chrono::seconds(5));
    std::vector<std::thread> threads;
    double out = 0.0;
    for (int r = 0; r < 3; ++r)
      threads.emplace_back([&, r] {
        const double v = 0.1 * (r + 1) + 1e-17 * r;
        auto res = fabric.allreduce_blocking(r, 0, std::span{&v, 1});
        if (r == 0) out = res[0];
      });
    for (auto& t : threads) t.join();
    return out;
  };
  const double first = run_once();
  for (int i = 0; i < 5; ++i) REQUIRE(run_once() == first);
}

TEST_CASE("fabric: mismatched collective counts hit the watchdog") {
  Fabric fabric(2, std::chrono::milliseconds(100));
  std::exception_ptr err;
  std::thread t0([&] {
    const double v = 1.0;
    try {
      fabric.allreduce_blocking(0, 0, std::span{&v, 1});
      fabric.allreduce_blocking(0, 1, std::span{&v, 1});  // no peer will ever arrive
    } catch (...) {
      err = std::current_exception();
    }
  });
  std::thread t1([&] {
    const double v = 1.0;
    try {
      fabric.allreduce_blocking(1, 0, std::span{&v, 1});
    } catch (...) {
    }
  });
  t0.join();
  t1.join();
  REQUIRE(err);
  CHECK_THROWS_AS(std::rethrow_exception(err), ProtocolError);
}

TEST_CASE("fabric: mode mismatch is a protocol error") {
  Fabric fabric(2, std::chrono::seconds(5));
  std::exception_ptr e0, e1;
  std::thread t0([&] {
    const double v = 1.0;
    try {
      fabric.allreduce_blocking(0, 0, std::span{&v, 1});
    } catch (...) {
      e0 = std::current_exception();
    }
  });
  std::thread t1([&] {
    const double v = 1.0;
    try {
      // Give rank 0 a head start so its mode is registered first.
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      fabric.allreduce_post(1, 0, std::span{&v, 1});
    } catch (...) {
      e1 = std::current_exception();
    }
  });
  t0.join();
  t1.join();
  CHECK((e0 || e1));
}

TEST_CASE("exchange fills halo tails with the neighbor plane") {
  for (Backend b : {Backend::Sequential, Backend::ForkJoin,
                    Backend::TaskGraph}) {
    auto traces = two_rank_run(b, 2, [](Engine& eng, int rank,
                                        const LocalSystem& local) {
      const BufferId x = eng.new_vector("x", true);
      auto xs = eng.values(x);
      for (std::int64_t i = 0; i < local.local_nrows; ++i)
        xs[i] = static_cast<double>(local.row_begin + i);
      eng.exchange(x, 0);
      eng.drain();
      // Tail slots hold the neighbor's boundary plane (global row ids).
      for (std::int64_t i = 0; i < local.halo_size; ++i) {
        const double got = xs[local.local_nrows + i];
        const double want = rank == 0 ? 64.0 + i : 48.0 + i;
        REQUIRE(got == want);
      }
    });
    CHECK(count_kind(traces[0], EventKind::P2pSend) == 1);
    CHECK(count_kind(traces[0], EventKind::P2pRecv) == 1);
  }
}

TEST_CASE("alternating iterations use disjoint channel parities") {
  auto traces = two_rank_run(
      Backend::Sequential, 1, [](Engine& eng, int, const LocalSystem&) {
        const BufferId x = eng.new_vector("x", true);
        eng.exchange(x, 1);
        eng.exchange(x, 2);
      });
  bool p0 = false, p1 = false;
  for (const TraceEvent& e : traces[0].events) {
    if (e.kind != EventKind::P2pSend) continue;
    if (e.iter == 1) {
      CHECK(e.label.find("#p1") != std::string::npos);
      p1 = true;
    }
    if (e.iter == 2) {
      CHECK(e.label.find("#p0") != std::string::npos);
      p0 = true;
    }
  }
  CHECK(p0);
  CHECK(p1);
}

TEST_CASE("blocking allreduce emits blocking_wait; overlapped with compute "
          "does not") {
  // Blocking mode on the task-graph backend still waits.
  auto traces = two_rank_run(
      Backend::TaskGraph, 2, [](Engine& eng, int, const LocalSystem& local) {
        const BufferId x = eng.new_vector("x", true);
        const BufferId y = eng.new_vector("y");
        auto xs = eng.values(x);
        for (std::int64_t i = 0; i < local.local_nrows; ++i) xs[i] = 1.0;
        Engine::Slot local_dot = eng.dot(x, x, 1);
        eng.allreduce({local_dot}, CollectiveMode::Blocking, 1);
        // Overlapped collective with an independent compute step after it.
        Engine::Slot d2 = eng.dot(x, x, 2);
        auto res = eng.allreduce({d2}, CollectiveMode::Overlapped, 2);
        eng.exchange(x, 2);
        eng.spmv(x, y, 2);  // independent of the collective result
        eng.await(res[0]);
      });
  for (int r = 0; r < 2; ++r) {
    CHECK(count_kind(traces[r], EventKind::BlockingWait, 1) == 1);
    CHECK(count_kind(traces[r], EventKind::CollectiveEnd, 2) == 1);
  }
  TraceLog merged;
  for (auto& t : traces)
    merged.events.insert(merged.events.end(), t.events.begin(),
                         t.events.end());
  const BarrierCounts c1 = count_barriers(merged, 1);
  CHECK(c1.blocking == 1);
  CHECK(c1.overlapped == 0);
  const BarrierCounts c2 = count_barriers(merged, 2);
  CHECK(c2.blocking == 0);
  CHECK(c2.overlapped == 1);
}

TEST_CASE("trace completeness: one compute event per submitted kernel block") {
  auto traces = two_rank_run(
      Backend::TaskGraph, 2, [](Engine& eng, int, const LocalSystem&) {
        const BufferId x = eng.new_vector("x", true);
        const BufferId y = eng.new_vector("y");
        eng.exchange(x, 3);
        eng.spmv(x, y, 3);  // 4 blocks
        eng.axpby(eng.constant(1.0), y, eng.constant(0.0), y, y, 3);  // 4
      });
  // 4 spmv blocks + 4 axpby blocks per rank.
  CHECK(count_kind(traces[0], EventKind::Compute, 3) == 8);
  CHECK(count_kind(traces[1], EventKind::Compute, 3) == 8);
}

TEST_CASE("trace jsonl export carries the documented fields") {
  auto traces = two_rank_run(
      Backend::Sequential, 1, [](Engine& eng, int, const LocalSystem&) {
        const BufferId x = eng.new_vector("x", true);
        eng.exchange(x, 0);
      });
  std::ostringstream os;
  write_jsonl(traces[0], os);
  const std::string line = os.str();
  CHECK(line.find("\"rank\":0") != std::string::npos);
  CHECK(line.find("\"kind\":\"p2p_send\"") != std::string::npos);
  CHECK(line.find("\"t_start_ns\":") != std::string::npos);
}
