#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlamkit/engine.hpp"
#include "hlamkit/kernels.hpp"

namespace hlamkit {

enum class Method {
  Jacobi,
  GsSequential,
  GsRedBlack,
  GsRelaxed,
  Cg,
  CgNb,
  BiCgStab,
  BiCgStabB1,
};

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);
// cg-nb -> cg, bicgstab-b1 -> bicgstab, gs-* -> gs; identity otherwise.
Method classical_counterpart(Method m);

// Test probe invoked at the end of each iteration (synchronous backends
// only; forces no extra synchronization on Sequential).
struct IterationProbe {
  int iteration = 0;
  bool restarted = false;
  std::span<const double> r;
  std::span<const double> p;
  std::span<const double> shadow;  // r' (BiCGStab variants)
};

struct SolverConfig {
  Method method = Method::Cg;
  double epsilon = 1e-6;
  double restart_epsilon = 1e-5;
  bool relative_tolerance = false;  // scale epsilon by the initial residual
  int max_iterations = 5000;
  int max_restarts = 10;
  int task_count = 0;  // 0 -> 4 x workers
  std::int64_t simd_width = 8;
  bool count_accesses = false;
  bool capture_iterates = false;  // snapshot x after every iteration
  std::optional<std::vector<double>> initial_guess;  // global length; 0 if unset

  // Test hooks.
  std::function<void(const IterationProbe&)> probe;
  struct RestartInjection {
    int iteration = 0;
    double alpha_n = 0.0;
  };
  std::optional<RestartInjection> restart_injection;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  // Iterations that ran the complete loop body (a converging iteration may
  // exit halfway, with fewer collectives than a regular one).
  int full_iterations = 0;
  std::vector<double> residual_history;  // tested residual per iteration
  int restart_count = 0;
  int blocking_collectives = -1;    // per full iteration; -1 = not measured
  int overlapped_collectives = -1;
  std::vector<AccessCounts> per_iteration_accesses;
  double wall_seconds = 0.0;  // iteration loop only

  std::string method;
  std::string backend;
  int ranks = 1;
  int workers = 1;
  std::string grid;
  int stencil_points = 0;
  double epsilon = 0.0;

  std::string to_json() const;
};

// Expected collectives per full iteration for --verify-barriers and the
// acceptance suite.
BarrierCounts expected_barriers(Method m, Backend b);

// Runs one method on this rank's slice; the engine carries the backend,
// fabric and plans. Returns the report (scalar fields identical on every
// rank) and leaves the solution in x_out.
struct RankResult {
  SolveReport report;
  std::vector<double> x_own;                       // local solution rows
  std::vector<std::vector<double>> iterates_own;   // per-iteration snapshots
};

RankResult solve_rank(Engine& eng, const LocalSystem& sys,
                      const SolverConfig& cfg);

}  // namespace hlamkit
