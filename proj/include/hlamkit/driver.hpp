#pragma once

#include <chrono>
#include <vector>

#include "hlamkit/solvers.hpp"
#include "hlamkit/stencil.hpp"
#include "hlamkit/trace.hpp"

namespace hlamkit {

struct SolveOutcome {
  SolveReport report;
  std::vector<double> solution;               // assembled global x
  TraceLog trace;                             // merged over ranks
  std::vector<std::vector<double>> iterates;  // global x per iteration
};

// Decomposes the system over `rank_count` simulated ranks, runs the solver
// on one thread per rank with `workers` execution workers each, assembles
// the global solution and merges traces. Barrier counts of the first full
// iteration are folded into the report.
SolveOutcome run_solve(
    const LinearSystem& system, const GridSpec& spec, const SolverConfig& cfg,
    Backend backend, int rank_count, int workers,
    std::chrono::nanoseconds fabric_timeout = std::chrono::seconds(30));

// ||b - A x||_2 / ||b||_2 on the global system.
double true_residual(const LinearSystem& system, std::span<const double> x);

// Default per-rank worker count: hardware concurrency split over ranks,
// capped by the HLAMKIT_WORKERS environment variable.
int default_workers(int rank_count);

}  // namespace hlamkit
