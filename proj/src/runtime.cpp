#include "hlamkit/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <condition_variable>
#include <deque>
#include <queue>
#include <thread>

#include "hlamkit/errors.hpp"

namespace hlamkit {

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Sequential:
      return "seq";
    case Backend::ForkJoin:
      return "forkjoin";
    case Backend::TaskGraph:
      return "task";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Tracer

std::int64_t Tracer::Clock::now_ns() const {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::shared_ptr<const Tracer::Clock> Tracer::make_clock() {
  auto clock = std::make_shared<Clock>();
  clock->t0 = std::chrono::steady_clock::now();
  return clock;
}

Tracer::Tracer(int rank, std::shared_ptr<const Clock> clock, int lanes)
    : rank_(rank), clock_(std::move(clock)), lanes_(std::max(lanes, 1)) {}

void Tracer::log(int worker, EventKind kind, std::string label, int iter,
                 std::uint64_t op, std::uint64_t task, std::int64_t t0,
                 std::int64_t t1) {
  TraceEvent e;
  e.rank = rank_;
  e.worker = worker;
  e.kind = kind;
  e.label = std::move(label);
  e.iter = iter;
  e.op = op;
  e.task = task;
  e.t_start_ns = t0;
  e.t_end_ns = t1;
  lanes_.at(worker).push_back(std::move(e));
}

void Tracer::note_overlapped_window(std::uint64_t op, int iter,
                                    std::string label,
                                    std::uint64_t post_task) {
  std::lock_guard lk(window_mu_);
  windows_.push_back({op, iter, std::move(label), post_task, -1, -1});
}

void Tracer::set_window_begin(std::uint64_t op, std::int64_t begin_ns) {
  std::lock_guard lk(window_mu_);
  for (Window& w : windows_)
    if (w.op == op && w.begin_ns < 0) {
      w.begin_ns = begin_ns;
      return;
    }
}

void Tracer::close_overlapped_window(std::uint64_t op, std::int64_t end_ns) {
  std::lock_guard lk(window_mu_);
  for (Window& w : windows_)
    if (w.op == op && w.end_ns < 0) {
      w.end_ns = end_ns;
      return;
    }
}

TraceLog Tracer::finalize() {
  TraceLog out;
  for (auto& lane : lanes_) {
    out.events.insert(out.events.end(), lane.begin(), lane.end());
    lane.clear();
  }
  // An overlapped collective with no compute hiding its latency is a stall
  // the paper would read off the trace as a blocking barrier. The witness is
  // a compute task submitted after the posting task that started before the
  // completion ran, or one whose execution plainly intersects the window.
  {
    std::lock_guard lk(window_mu_);
    for (const Window& w : windows_) {
      if (w.begin_ns < 0 || w.end_ns < 0) continue;  // never ran to the end
      bool covered = false;
      for (const TraceEvent& e : out.events) {
        if (e.kind != EventKind::Compute) continue;
        if (e.task > w.post_task && e.t_start_ns < w.end_ns) {
          covered = true;
          break;
        }
        if (e.t_start_ns < w.end_ns && e.t_end_ns > w.begin_ns) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        TraceEvent e;
        e.rank = rank_;
        e.worker = 0;
        e.kind = EventKind::BlockingWait;
        e.label = w.label;
        e.iter = w.iter;
        e.op = w.op;
        e.task = w.post_task;
        e.t_start_ns = w.begin_ns;
        e.t_end_ns = w.end_ns;
        out.events.push_back(std::move(e));
      }
    }
    windows_.clear();
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) {
                     return a.t_start_ns < b.t_start_ns;
                   });
  return out;
}

// ---------------------------------------------------------------------------
// Shared pieces

void Executor::serial(std::vector<TaskNode> nodes) {
  for (TaskNode& n : nodes) submit(std::move(n));
}

namespace {

bool region_overlap(const BufferRegion& a, const BufferRegion& b) {
  return a.buffer == b.buffer && a.offset < b.offset + b.length &&
         b.offset < a.offset + a.length;
}

bool region_covers(const BufferRegion& outer, const BufferRegion& inner) {
  return outer.buffer == inner.buffer && outer.offset <= inner.offset &&
         outer.offset + outer.length >= inner.offset + inner.length;
}

void run_body(TaskNode& node, std::uint64_t id, int rank, int worker,
              Tracer& tracer, const CounterProvider& counters) {
  TaskContext ctx;
  ctx.rank = rank;
  ctx.worker = worker;
  ctx.task = id;
  ctx.tracer = &tracer;
  ctx.counter = counters ? counters(node.iteration) : nullptr;
  if (node.auto_trace) {
    const std::int64_t t0 = tracer.now();
    node.body(ctx);
    tracer.log(worker, EventKind::Compute, node.label, node.iteration, 0, id,
               t0, tracer.now());
  } else {
    node.body(ctx);
  }
}

// Dependency bookkeeping per buffer: last writers and the readers seen since.
class RegionTracker {
 public:
  void record(const TaskNode& node, std::uint64_t self,
              std::vector<std::uint64_t>& deps) {
    for (const BufferRegion& r : node.reads)
      for (const WriterEnt& w : writers_)
        if (w.id != self && region_overlap(w.rg, r)) deps.push_back(w.id);
    for (const BufferRegion& w : node.writes) {
      for (const ReaderEnt& rd : readers_)
        if (rd.id != self && region_overlap(rd.rg, w)) deps.push_back(rd.id);
      for (const WriterEnt& wr : writers_)
        if (wr.id != self && region_overlap(wr.rg, w) &&
            !(node.relaxed_writes && wr.relaxed))
          deps.push_back(wr.id);
    }
    for (const BufferRegion& r : node.reads) readers_.push_back({r, self});
    for (const BufferRegion& w : node.writes) {
      // Ordering with covered entries is established above, so they can be
      // dropped; concurrent relaxed writers stay visible to future readers.
      std::erase_if(readers_,
                    [&](const ReaderEnt& rd) { return region_covers(w, rd.rg); });
      std::erase_if(writers_, [&](const WriterEnt& wr) {
        return region_covers(w, wr.rg) && wr.id != self &&
               !(node.relaxed_writes && wr.relaxed);
      });
      writers_.push_back({w, self, node.relaxed_writes});
    }
  }

 private:
  struct WriterEnt {
    BufferRegion rg;
    std::uint64_t id;
    bool relaxed;
  };
  struct ReaderEnt {
    BufferRegion rg;
    std::uint64_t id;
  };
  std::vector<WriterEnt> writers_;
  std::vector<ReaderEnt> readers_;
};

// ---------------------------------------------------------------------------
// Sequential backend: execute at submission on the rank thread.

class SequentialExecutor final : public Executor {
 public:
  SequentialExecutor(int rank, Tracer& tracer, Fabric* fabric,
                     CounterProvider counters)
      : rank_(rank),
        tracer_(tracer),
        fabric_(fabric),
        counters_(std::move(counters)) {}

  std::uint64_t submit(TaskNode node) override {
    for (std::uint64_t d : node.after)
      if (d >= next_id_)
        throw SchedulingError(
            "explicit dependency on an unsubmitted task forms a cycle");
    if (node.gate && !node.gate()) {
      if (!fabric_)
        throw SchedulingError("gated task requires a fabric");
      fabric_->wait_event(node.gate);
    }
    const std::uint64_t id = next_id_++;
    run_body(node, id, rank_, 0, tracer_, counters_);
    return id;
  }

  void batch(std::vector<TaskNode> nodes) override {
    for (TaskNode& n : nodes) submit(std::move(n));
  }

  void wait(const std::function<bool()>& pred) override {
    if (pred()) return;
    if (!fabric_) throw SchedulingError("wait would never complete");
    fabric_->wait_event(pred);
  }

  void drain() override {}
  int workers() const override { return 1; }

 private:
  int rank_;
  Tracer& tracer_;
  Fabric* fabric_;
  CounterProvider counters_;
  std::uint64_t next_id_ = 0;
};

// ---------------------------------------------------------------------------
// Fork-join backend: batches run team-parallel with an implicit barrier;
// everything else runs inline on the rank thread.

class ForkJoinExecutor final : public Executor {
 public:
  ForkJoinExecutor(int rank, int team, Tracer& tracer, Fabric* fabric,
                   CounterProvider counters)
      : rank_(rank),
        team_size_(std::max(team, 1)),
        tracer_(tracer),
        fabric_(fabric),
        counters_(std::move(counters)) {
    for (int m = 1; m < team_size_; ++m)
      members_.emplace_back([this, m] { member_loop(m); });
  }

  ~ForkJoinExecutor() override {
    {
      std::lock_guard lk(mu_);
      stopping_ = true;
      cv_.notify_all();
    }
    for (auto& t : members_) t.join();
  }

  std::uint64_t submit(TaskNode node) override {
    for (std::uint64_t d : node.after)
      if (d >= next_id_)
        throw SchedulingError(
            "explicit dependency on an unsubmitted task forms a cycle");
    if (node.gate && !node.gate()) {
      if (!fabric_)
        throw SchedulingError("gated task requires a fabric");
      fabric_->wait_event(node.gate);
    }
    const std::uint64_t id = next_id_++;
    run_body(node, id, rank_, 0, tracer_, counters_);
    return id;
  }

  void batch(std::vector<TaskNode> nodes) override {
    if (nodes.empty()) return;
    const std::uint64_t base_id = next_id_;
    batch_base_ = base_id;
    next_id_ += nodes.size();
    {
      std::lock_guard lk(mu_);
      current_ = &nodes;
      members_done_ = 0;
      ++generation_;
      cv_.notify_all();
    }
    run_chunk(nodes, 0);
    std::unique_lock lk(mu_);
    cv_.wait(lk, [this] { return members_done_ == team_size_ - 1; });
    current_ = nullptr;
    if (failure_) {
      auto f = failure_;
      failure_ = nullptr;
      std::rethrow_exception(f);
    }
  }

  void wait(const std::function<bool()>& pred) override {
    if (pred()) return;
    if (!fabric_) throw SchedulingError("wait would never complete");
    fabric_->wait_event(pred);
  }

  void drain() override {}
  int workers() const override { return team_size_; }

 private:
  void run_chunk(std::vector<TaskNode>& nodes, int member) {
    for (std::size_t i = member; i < nodes.size();
         i += static_cast<std::size_t>(team_size_)) {
      try {
        run_body(nodes[i], batch_base_ + i, rank_, member, tracer_,
                 counters_);
      } catch (...) {
        std::lock_guard lk(mu_);
        if (!failure_) failure_ = std::current_exception();
      }
    }
  }

  void member_loop(int member) {
    std::uint64_t seen = 0;
    while (true) {
      std::vector<TaskNode>* work = nullptr;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        work = current_;
      }
      if (work) run_chunk(*work, member);
      {
        std::lock_guard lk(mu_);
        ++members_done_;
        cv_.notify_all();
      }
    }
  }

  int rank_;
  int team_size_;
  Tracer& tracer_;
  Fabric* fabric_;
  CounterProvider counters_;

  std::vector<std::thread> members_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<TaskNode>* current_ = nullptr;
  std::uint64_t generation_ = 0;
  int members_done_ = 0;
  bool stopping_ = false;
  std::exception_ptr failure_;
  std::uint64_t next_id_ = 0;
  std::uint64_t batch_base_ = 0;
};

// ---------------------------------------------------------------------------
// Task-graph backend: region-dependency scheduling over a worker pool.
// Ready tasks are dispatched FIFO by submission index.

class TaskGraphExecutor final : public Executor {
 public:
  TaskGraphExecutor(int rank, int workers, Tracer& tracer, Fabric* fabric,
                    CounterProvider counters)
      : rank_(rank),
        tracer_(tracer),
        fabric_(fabric),
        counters_(std::move(counters)) {
    if (fabric_)
      fabric_->set_notifier(rank_, [this] {
        gated_dirty_.store(true, std::memory_order_release);
        cv_work_.notify_all();
        cv_progress_.notify_all();
      });
    const int n = std::max(workers, 1);
    pool_.reserve(n);
    for (int w = 0; w < n; ++w)
      pool_.emplace_back([this, w] { worker_loop(w); });
  }

  ~TaskGraphExecutor() override {
    if (fabric_) fabric_->clear_notifier(rank_);
    {
      std::lock_guard lk(mu_);
      stopping_ = true;
      cv_work_.notify_all();
    }
    for (auto& t : pool_) t.join();
  }

  std::uint64_t submit(TaskNode node) override {
    std::unique_lock lk(mu_);
    rethrow_failure_locked();
    const std::uint64_t id = recs_.size();
    for (std::uint64_t d : node.after)
      if (d >= id)
        throw SchedulingError(
            "explicit dependency on an unsubmitted task forms a cycle");
    std::vector<std::uint64_t> deps(node.after.begin(), node.after.end());
    tracker_.record(node, id, deps);
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());

    recs_.emplace_back();
    Rec& rec = recs_.back();
    rec.node = std::move(node);
    for (std::uint64_t d : deps) {
      if (!recs_[d].done) {
        recs_[d].dependents.push_back(id);
        ++rec.pending;
      }
    }
    ++submitted_;
    if (rec.pending == 0) enqueue_locked(id);
    cv_work_.notify_all();
    return id;
  }

  void batch(std::vector<TaskNode> nodes) override {
    for (TaskNode& n : nodes) submit(std::move(n));
  }

  void wait(const std::function<bool()>& pred) override {
    std::unique_lock lk(mu_);
    while (!pred()) {
      rethrow_failure_locked();
      if (cv_progress_.wait_for(lk, kWaitSlice) == std::cv_status::timeout) {
        if (fabric_) fabric_->check();
        if (++stalled_slices_ > kMaxStallSlices)
          throw ProtocolError("task-graph wait stalled");
      } else {
        stalled_slices_ = 0;
      }
    }
    rethrow_failure_locked();
  }

  void drain() override {
    wait([this] { return completed_ == submitted_; });
  }

  int workers() const override { return static_cast<int>(pool_.size()); }

 private:
  struct Rec {
    TaskNode node;
    int pending = 0;
    bool done = false;
    std::vector<std::uint64_t> dependents;
  };

  static constexpr auto kWaitSlice = std::chrono::milliseconds(200);
  static constexpr int kMaxStallSlices = 300;  // 60 s watchdog

  void rethrow_failure_locked() {
    if (failure_) {
      auto f = failure_;
      std::rethrow_exception(f);
    }
  }

  void enqueue_locked(std::uint64_t id) {
    Rec& r = recs_[id];
    if (r.node.gate && !r.node.gate()) {
      gated_.push_back(id);
      return;
    }
    if (r.node.background)
      bg_ready_.push(id);
    else
      ready_.push(id);
  }

  void promote_gated_locked() {
    for (std::size_t i = 0; i < gated_.size();) {
      const std::uint64_t id = gated_[i];
      if (recs_[id].node.gate()) {
        if (recs_[id].node.background)
          bg_ready_.push(id);
        else
          ready_.push(id);
        gated_[i] = gated_.back();
        gated_.pop_back();
      } else {
        ++i;
      }
    }
  }

  void check_inflight_locked(const Rec& rec) {
    for (std::uint64_t other : running_) {
      const Rec& o = recs_[other];
      for (const BufferRegion& a : rec.node.writes)
        for (const BufferRegion& b : o.node.writes)
          if (region_overlap(a, b) &&
              !(rec.node.relaxed_writes && o.node.relaxed_writes))
            throw ContractViolation(
                "concurrent overlapping writes outside a relaxed region");
    }
  }

  void worker_loop(int worker) {
    std::unique_lock lk(mu_);
    while (true) {
      if (stopping_) return;
      if (gated_dirty_.exchange(false, std::memory_order_acq_rel))
        promote_gated_locked();
      if (!ready_.empty() || !bg_ready_.empty()) {
        auto& queue = !ready_.empty() ? ready_ : bg_ready_;
        const std::uint64_t id = queue.top();
        queue.pop();
        Rec& rec = recs_[id];
        check_inflight_locked(rec);
        running_.push_back(id);
        lk.unlock();
        try {
          run_body(rec.node, id, rank_, worker, tracer_, counters_);
        } catch (...) {
          std::lock_guard g(mu_);
          if (!failure_) failure_ = std::current_exception();
        }
        lk.lock();
        std::erase(running_, id);
        rec.done = true;
        ++completed_;
        for (std::uint64_t dep : rec.dependents)
          if (--recs_[dep].pending == 0) enqueue_locked(dep);
        cv_work_.notify_all();
        cv_progress_.notify_all();
        continue;
      }
      cv_work_.wait_for(lk, std::chrono::milliseconds(50));
    }
  }

  int rank_;
  Tracer& tracer_;
  Fabric* fabric_;
  CounterProvider counters_;

  std::mutex mu_;
  std::condition_variable cv_work_;
  std::condition_variable cv_progress_;
  std::deque<Rec> recs_;
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>,
                      std::greater<>>
      ready_;
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>,
                      std::greater<>>
      bg_ready_;
  std::vector<std::uint64_t> gated_;
  std::vector<std::uint64_t> running_;
  RegionTracker tracker_;
  std::vector<std::thread> pool_;
  std::atomic<bool> gated_dirty_{false};
  std::uint64_t submitted_ = 0;
  std::uint64_t completed_ = 0;
  int stalled_slices_ = 0;
  bool stopping_ = false;
  std::exception_ptr failure_;
};

}  // namespace

std::unique_ptr<Executor> make_executor(Backend backend, int rank, int workers,
                                        Tracer& tracer, Fabric* fabric,
                                        CounterProvider counters) {
  switch (backend) {
    case Backend::Sequential:
      return std::make_unique<SequentialExecutor>(rank, tracer, fabric,
                                                  std::move(counters));
    case Backend::ForkJoin:
      return std::make_unique<ForkJoinExecutor>(rank, workers, tracer, fabric,
                                                std::move(counters));
    case Backend::TaskGraph:
      return std::make_unique<TaskGraphExecutor>(rank, workers, tracer, fabric,
                                                 std::move(counters));
  }
  throw SchedulingError("unknown backend");
}

TraceLog run_graph(Backend backend, std::vector<TaskNode> nodes, int workers) {
  auto clock = Tracer::make_clock();
  Tracer tracer(0, clock, std::max(workers, 1));
  auto exec = make_executor(backend, 0, workers, tracer, nullptr);
  for (TaskNode& n : nodes) exec->submit(std::move(n));
  exec->drain();
  exec.reset();
  return tracer.finalize();
}

}  // namespace hlamkit
