#include "hlamkit/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "hlamkit/errors.hpp"
#include "hlamkit/partition.hpp"

namespace hlamkit {

int default_workers(int rank_count) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int w = std::max(1, hw / std::max(1, rank_count));
  if (const char* cap = std::getenv("HLAMKIT_WORKERS")) {
    const int c = std::atoi(cap);
    if (c >= 1) w = std::min(w, c);
  }
  return w;
}

double true_residual(const LinearSystem& system, std::span<const double> x) {
  const CsrMatrix& a = system.matrix;
  double rr = 0.0, bb = 0.0;
  for (std::int64_t i = 0; i < a.nrows; ++i) {
    double sum = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      sum += a.values[k] * x[a.col_idx[k]];
    const double ri = system.rhs[i] - sum;
    rr += ri * ri;
    bb += system.rhs[i] * system.rhs[i];
  }
  return bb > 0.0 ? std::sqrt(rr) / std::sqrt(bb) : std::sqrt(rr);
}

namespace {

// First full iteration of the trace (init is tagged 0; the last iteration
// may be partial), or -1 when the solve had no full iteration.
int first_full_iteration(const SolveReport& report) {
  return report.full_iterations >= 1 ? 1 : -1;
}

}  // namespace

SolveOutcome run_solve(const LinearSystem& system, const GridSpec& spec,
                       const SolverConfig& cfg, Backend backend,
                       int rank_count, int workers,
                       std::chrono::nanoseconds fabric_timeout) {
  if (workers < 1) workers = default_workers(rank_count);
  const RankPlan plan = plan_ranks(spec, rank_count);

  std::vector<LocalSystem> locals;
  locals.reserve(rank_count);
  for (int r = 0; r < rank_count; ++r)
    locals.push_back(build_local_system(system, plan, r));

  const int task_count =
      cfg.task_count > 0 ? cfg.task_count : 4 * std::max(workers, 1);
  std::vector<TaskPlan> task_plans;
  task_plans.reserve(rank_count);
  for (int r = 0; r < rank_count; ++r)
    task_plans.push_back(
        plan_tasks(locals[r].matrix, task_count, cfg.simd_width));

  Fabric fabric(rank_count, fabric_timeout);
  auto clock = Tracer::make_clock();

  struct PerRank {
    RankResult result;
    TraceLog trace;
    std::exception_ptr error;
  };
  std::vector<PerRank> per_rank(rank_count);

  auto rank_main = [&](int r) {
    try {
      Engine::Setup setup;
      setup.backend = backend;
      setup.workers = workers;
      setup.system = &locals[r];
      setup.slab = &plan.ranks[r];
      setup.tasks = &task_plans[r];
      setup.fabric = &fabric;
      setup.rank = r;
      setup.count_accesses = cfg.count_accesses;
      setup.slot_capacity =
          std::max<std::size_t>(1 << 16,
                                static_cast<std::size_t>(cfg.max_iterations) *
                                        32 +
                                    1024);
      setup.clock = clock;
      Engine eng(setup);
      per_rank[r].result = solve_rank(eng, locals[r], cfg);
      per_rank[r].trace = eng.take_trace();
    } catch (...) {
      per_rank[r].error = std::current_exception();
      fabric.poison("rank " + std::to_string(r) + " failed");
    }
  };

  if (rank_count == 1) {
    rank_main(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(rank_count);
    for (int r = 0; r < rank_count; ++r) threads.emplace_back(rank_main, r);
    for (auto& t : threads) t.join();
  }

  // Surface the first genuine failure; peers killed by the poison are noise.
  for (const PerRank& pr : per_rank) {
    if (!pr.error) continue;
    try {
      std::rethrow_exception(pr.error);
    } catch (const FabricError&) {
      continue;
    } catch (...) {
      std::rethrow_exception(pr.error);
    }
  }
  for (const PerRank& pr : per_rank)
    if (pr.error) std::rethrow_exception(pr.error);

  SolveOutcome out;
  out.report = per_rank[0].result.report;
  out.report.method = method_name(cfg.method);
  out.report.backend = backend_name(backend);
  out.report.ranks = rank_count;
  out.report.workers = workers;
  {
    std::ostringstream g;
    g << spec.nx << 'x' << spec.ny << 'x' << spec.nz;
    out.report.grid = g.str();
  }
  out.report.stencil_points = spec.stencil == Stencil::Seven ? 7 : 27;
  out.report.epsilon = cfg.epsilon;

  out.solution.assign(system.matrix.nrows, 0.0);
  for (int r = 0; r < rank_count; ++r) {
    const auto& xr = per_rank[r].result.x_own;
    std::copy(xr.begin(), xr.end(),
              out.solution.begin() + plan.ranks[r].row_begin);
  }

  for (int r = 0; r < rank_count; ++r) {
    auto& ev = per_rank[r].trace.events;
    out.trace.events.insert(out.trace.events.end(), ev.begin(), ev.end());
  }

  if (cfg.capture_iterates) {
    const std::size_t n_iter = per_rank[0].result.iterates_own.size();
    out.iterates.assign(n_iter, std::vector<double>(system.matrix.nrows, 0.0));
    for (int r = 0; r < rank_count; ++r)
      for (std::size_t k = 0; k < n_iter; ++k) {
        const auto& seg = per_rank[r].result.iterates_own[k];
        std::copy(seg.begin(), seg.end(),
                  out.iterates[k].begin() + plan.ranks[r].row_begin);
      }
  }

  const int probe_iter = first_full_iteration(out.report);
  if (probe_iter >= 0) {
    const BarrierCounts bc = count_barriers(out.trace, probe_iter);
    out.report.blocking_collectives = bc.blocking;
    out.report.overlapped_collectives = bc.overlapped;
  }
  return out;
}

}  // namespace hlamkit
