#pragma once

#include <atomic>
#include <cstdint>
#include <span>

#include "hlamkit/stencil.hpp"

namespace hlamkit {

// Element-access instrumentation. Counts use a distinct-operand footprint:
// each vector operand contributes its range length, matrix values contribute
// nnz(range), SpMV's x-gather contributes the range length (distinct-element
// model; index arrays are not counted). A null counter disables counting.
struct AccessCounter {
  std::atomic<std::uint64_t> elements_read{0};
  std::atomic<std::uint64_t> elements_written{0};

  void add_reads(std::uint64_t n) {
    elements_read.fetch_add(n, std::memory_order_relaxed);
  }
  void add_writes(std::uint64_t n) {
    elements_written.fetch_add(n, std::memory_order_relaxed);
  }
};

struct AccessCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t total() const { return reads + writes; }
};

struct Range {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t size() const { return end - begin; }
};

// y[i] = sum_j a_ij * x[j] for i in rows; entries outside rows untouched.
// x may carry halo elements at its tail (columns >= nrows index into it).
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          Range rows, AccessCounter* counter = nullptr);

// Left-to-right partial sum over one block. Canonical reductions combine
// per-block partials in ascending block order; see Engine::dot.
double dot_block(std::span<const double> x, std::span<const double> y,
                 Range range, AccessCounter* counter = nullptr);

// w = a*x + b*y; w may alias x or y.
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> w, Range range,
           AccessCounter* counter = nullptr);

// z = a*x + b*y + c*z, reading each z element exactly once before writing it.
void triad(double a, std::span<const double> x, double b,
           std::span<const double> y, double c, std::span<double> z,
           Range range, AccessCounter* counter = nullptr);

// r = b - A*x over rows; returns the left-to-right partial sum of r_i^2.
double residual_fused(const CsrMatrix& a, std::span<const double> x,
                      std::span<const double> b, std::span<double> r,
                      Range rows, AccessCounter* counter = nullptr);

// x_new[i] = (b[i] - sum_{j != i} a_ij x_old[j]) / a_ii over rows; returns
// the partial sum of (b - A x_old)_i^2 from the same pass.
double jacobi_sweep(const CsrMatrix& a, std::span<const double> x_old,
                    std::span<const double> b, std::span<double> x_new,
                    Range rows, AccessCounter* counter = nullptr);

// In-place Gauss-Seidel half sweeps. Relaxed variants go through relaxed
// atomic element access so deliberate cross-task races stay torn-free.
void gs_forward(const CsrMatrix& a, std::span<double> x,
                std::span<const double> b, Range rows,
                AccessCounter* counter = nullptr);
void gs_backward(const CsrMatrix& a, std::span<double> x,
                 std::span<const double> b, Range rows,
                 AccessCounter* counter = nullptr);
void gs_forward_relaxed(const CsrMatrix& a, std::span<double> x,
                        std::span<const double> b, Range rows,
                        AccessCounter* counter = nullptr);
void gs_backward_relaxed(const CsrMatrix& a, std::span<double> x,
                         std::span<const double> b, Range rows,
                         AccessCounter* counter = nullptr);

enum class KrylovMethod { Cg, CgNb, BiCgStab, BiCgStabB1 };

// Per-iteration element-access model: (12+n)r, (15+n)r, (21+2n)r, (24+2n)r
// for CG, CG-NB, BiCGStab, BiCGStab-B1 with n = average nonzeros per row.
double estimate_accesses(KrylovMethod method, double avg_nnz_per_row,
                         std::int64_t rows);

}  // namespace hlamkit
