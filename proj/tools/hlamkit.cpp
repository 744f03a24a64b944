// Command-line driver: problem generation, single solves with verification,
// scaling sweeps with repetition statistics, trace capture and report
// emission.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hlamkit/bench.hpp"
#include "hlamkit/driver.hpp"
#include "hlamkit/verify.hpp"

namespace {

using namespace hlamkit;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBarrierMismatch = 3;

bool parse_grid(const std::string& s, GridSpec* g) {
  char x1 = 0, x2 = 0;
  std::istringstream is(s);
  if (!(is >> g->nx >> x1 >> g->ny >> x2 >> g->nz)) return false;
  if (x1 != 'x' || x2 != 'x') return false;
  return g->nx >= 1 && g->ny >= 1 && g->nz >= 1;
}

std::optional<Backend> parse_backend(const std::string& s) {
  if (s == "seq" || s == "sequential") return Backend::Sequential;
  if (s == "forkjoin" || s == "fj") return Backend::ForkJoin;
  if (s == "task" || s == "taskgraph") return Backend::TaskGraph;
  return std::nullopt;
}

struct SolveArgs {
  std::string method = "cg";
  std::string grid = "8x8x8";
  int stencil = 27;
  std::string backend = "seq";
  int ranks = 1;
  int workers = 0;
  int tasks = 0;
  std::int64_t simd_width = 8;
  double epsilon = 1e-6;
  double restart_epsilon = 1e-5;
  int max_iterations = 5000;
  bool relative = false;
  bool count_accesses = false;
  bool verify_barriers = false;
  bool dump_plan = false;
  std::string trace_path;
  std::string report_path;
  std::string residuals_path;
};

void add_solve_flags(CLI::App* cmd, SolveArgs* a) {
  cmd->fallthrough();
  cmd->add_option("--method", a->method,
                  "jacobi|gs|gs-redblack|gs-relaxed|cg|cg-nb|bicgstab|"
                  "bicgstab-b1")
      ->check(CLI::IsMember({"jacobi", "gs", "gs-sequential", "gs-redblack",
                             "gs-relaxed", "cg", "cg-nb", "bicgstab",
                             "bicgstab-b1"}));
  cmd->add_option("--grid", a->grid, "grid points as NXxNYxNZ, e.g. 16x16x16");
  cmd->add_option("--stencil", a->stencil, "7 or 27")
      ->check(CLI::IsMember({7, 27}));
  cmd->add_option("--backend", a->backend, "seq|forkjoin|task")
      ->check(CLI::IsMember({"seq", "sequential", "forkjoin", "fj", "task",
                             "taskgraph"}));
  cmd->add_option("--ranks", a->ranks, "simulated rank count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", a->workers,
                  "execution workers per rank (0 = auto, capped by "
                  "HLAMKIT_WORKERS)");
  cmd->add_option("--tasks", a->tasks, "tasks per rank (0 = 4x workers)");
  cmd->add_option("--simd-width", a->simd_width,
                  "block alignment in elements");
  cmd->add_option("--epsilon", a->epsilon, "convergence tolerance");
  cmd->add_option("--restart-epsilon", a->restart_epsilon,
                  "bicgstab restart threshold");
  cmd->add_option("--max-iters", a->max_iterations, "iteration cap");
  cmd->add_flag("--relative", a->relative,
                "scale the tolerance by the initial residual");
  cmd->add_flag("--count-accesses", a->count_accesses,
                "instrument element accesses");
}

GridSpec grid_of(const SolveArgs& a) {
  GridSpec g;
  if (!parse_grid(a.grid, &g)) throw CLI::ValidationError("--grid", a.grid);
  g.stencil = a.stencil == 7 ? Stencil::Seven : Stencil::TwentySeven;
  return g;
}

SolverConfig config_of(const SolveArgs& a) {
  SolverConfig cfg;
  cfg.method = *parse_method(a.method);
  cfg.epsilon = a.epsilon;
  cfg.restart_epsilon = a.restart_epsilon;
  cfg.relative_tolerance = a.relative;
  cfg.max_iterations = a.max_iterations;
  cfg.task_count = a.tasks;
  cfg.simd_width = a.simd_width;
  cfg.count_accesses = a.count_accesses;
  return cfg;
}

int cmd_gen(const SolveArgs& a, const std::string& out_path) {
  const GridSpec g = grid_of(a);
  const LinearSystem sys = generate(g);
  std::cout << "rows " << sys.matrix.nrows << "  nnz " << sys.matrix.nnz()
            << "  avg nnz/row " << average_nnz_per_row(sys.matrix) << "\n";
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) {
      std::cerr << "cannot open " << out_path << "\n";
      return kExitFailure;
    }
    write_matrix_market(sys.matrix, os);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_solve(const SolveArgs& a) {
  const GridSpec g = grid_of(a);
  const SolverConfig cfg = config_of(a);
  const Backend backend = *parse_backend(a.backend);

  if (a.dump_plan) {
    const RankPlan rp = plan_ranks(g, a.ranks);
    const LocalSystem local0 = build_local_system(generate(g), rp, 0);
    const int workers = a.workers > 0 ? a.workers : default_workers(a.ranks);
    const int tasks = a.tasks > 0 ? a.tasks : 4 * workers;
    const TaskPlan tp = plan_tasks(local0.matrix, tasks, a.simd_width);
    std::cout << to_json(rp) << "\n" << to_json(tp) << "\n";
    return 0;
  }

  const LinearSystem sys = generate(g);
  SolveOutcome out = run_solve(sys, g, cfg, backend, a.ranks, a.workers);
  out.report.epsilon = a.epsilon;
  const double res = true_residual(sys, out.solution);

  std::cout << out.report.method << " on " << out.report.grid << "/"
            << out.report.stencil_points << "pt, backend "
            << out.report.backend << ", ranks " << out.report.ranks
            << ": " << (out.report.converged ? "converged" : "NOT converged")
            << " in " << out.report.iterations << " iterations, true residual "
            << res << ", wall " << out.report.wall_seconds << " s\n";

  if (!a.report_path.empty()) {
    std::ofstream os(a.report_path);
    os << out.report.to_json() << "\n";
  }
  if (!a.residuals_path.empty()) {
    std::ofstream os(a.residuals_path);
    os << "iteration,residual\n";
    for (std::size_t i = 0; i < out.report.residual_history.size(); ++i)
      os << i << ',' << out.report.residual_history[i] << '\n';
  }
  if (!a.trace_path.empty()) {
    std::ofstream os(a.trace_path);
    write_jsonl(out.trace, os);
  }

  if (a.verify_barriers) {
    const BarrierCounts want = expected_barriers(cfg.method, backend);
    for (int t = 1; t <= out.report.full_iterations; ++t) {
      const BarrierCounts got = count_barriers(out.trace, t);
      if (got.blocking != want.blocking || got.overlapped != want.overlapped) {
        std::cerr << "barrier mismatch at iteration " << t << ": got "
                  << got.blocking << " blocking/" << got.overlapped
                  << " overlapped, want " << want.blocking << "/"
                  << want.overlapped << "\n";
        return kExitBarrierMismatch;
      }
    }
    std::cout << "barriers per iteration: " << want.blocking << " blocking, "
              << want.overlapped << " overlapped (verified)\n";
  }

  return out.report.converged ? 0 : kExitFailure;
}

int cmd_bench(const SolveArgs& a, const std::string& mode,
              const std::vector<std::string>& methods,
              const std::vector<std::string>& backends,
              const std::vector<int>& ranks, int reps, std::uint64_t seed,
              const std::string& csv_path, const std::string& summary_path,
              const std::string& json_path) {
  BenchSpec spec;
  spec.mode = mode == "strong" ? BenchMode::Strong : BenchMode::Weak;
  spec.base_grid = grid_of(a);
  spec.rank_counts = ranks;
  spec.repetitions = reps;
  spec.seed = seed;
  spec.workers = a.workers;
  spec.solver = config_of(a);
  for (const std::string& m : methods) {
    auto pm = parse_method(m);
    if (!pm) throw CLI::ValidationError("--methods", m);
    spec.methods.push_back(*pm);
  }
  for (const std::string& b : backends) {
    auto pb = parse_backend(b);
    if (!pb) throw CLI::ValidationError("--backends", b);
    spec.backends.push_back(*pb);
  }

  const EfficiencyTable table = run_bench(spec);
  write_summary_csv(table, std::cout);
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    write_samples_csv(table, os);
  }
  if (!summary_path.empty()) {
    std::ofstream os(summary_path);
    write_summary_csv(table, os);
  }
  if (!json_path.empty()) {
    std::ofstream os(json_path);
    os << to_json(table) << "\n";
  }
  for (const BenchCell& c : table.cells)
    if (!c.valid) return kExitFailure;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stencil-system iterative solver kit"};
  app.require_subcommand(1);
  // TOML config with one section per subcommand, e.g. [solve] method="cg".
  app.set_config("--config", "", "read options from a TOML file")
      ->configurable(false);

  SolveArgs args;

  CLI::App* gen = app.add_subcommand("gen", "generate the stencil system");
  std::string gen_out;
  add_solve_flags(gen, &args);
  gen->add_option("--out", gen_out, "write Matrix Market file");

  CLI::App* solve = app.add_subcommand("solve", "run one solve");
  add_solve_flags(solve, &args);
  solve->add_option("--trace", args.trace_path, "write JSONL trace");
  solve->add_option("--report", args.report_path, "write JSON report");
  solve->add_option("--residuals", args.residuals_path,
                    "write residual history CSV");
  solve->add_flag("--verify-barriers", args.verify_barriers,
                  "assert the collective counts for this method/backend");
  solve->add_flag("--dump-plan", args.dump_plan,
                  "print rank/task plans as JSON and exit");

  CLI::App* bench = app.add_subcommand("bench", "scaling sweep");
  std::string mode = "weak";
  std::vector<std::string> methods{"cg"};
  std::vector<std::string> backends{"seq"};
  std::vector<int> ranks{1, 2, 4};
  int reps = 10;
  std::uint64_t seed = 0;
  std::string csv_path, summary_path, json_path;
  add_solve_flags(bench, &args);
  bench->add_option("--mode", mode, "weak|strong")
      ->check(CLI::IsMember({"weak", "strong"}));
  bench->add_option("--methods", methods, "methods to sweep")->delimiter(',');
  bench->add_option("--backends", backends, "backends to sweep")
      ->delimiter(',');
  bench->add_option("--rank-counts", ranks, "rank counts to sweep")
      ->delimiter(',');
  bench->add_option("--reps", reps, "repetitions per cell");
  bench->add_option("--seed", seed, "recorded in the JSON summary");
  bench->add_option("--csv", csv_path, "write per-sample CSV");
  bench->add_option("--summary-csv", summary_path, "write summary CSV");
  bench->add_option("--json", json_path, "write JSON summary");

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  verify->fallthrough();
  std::string only;
  verify->add_option("--only", only, "run checks whose name contains this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(args, gen_out);
    if (solve->parsed()) return cmd_solve(args);
    if (bench->parsed())
      return cmd_bench(args, mode, methods, backends, ranks, reps, seed,
                       csv_path, summary_path, json_path);
    if (verify->parsed()) {
      const int failures = hlamkit::run_verification(only, std::cout);
      if (failures > 0)
        std::cout << failures << " check(s) failed\n";
      else
        std::cout << "all checks passed\n";
      return failures == 0 ? 0 : kExitFailure;
    }
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const hlamkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
