// Test-only reference computations, independent of the library kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hlamkit/stencil.hpp"

namespace testutil {

// Dense copy of a CSR matrix for brute-force comparisons.
inline std::vector<double> densify(const hlamkit::CsrMatrix& m) {
  std::vector<double> d(static_cast<std::size_t>(m.nrows) * m.nrows, 0.0);
  for (std::int64_t i = 0; i < m.nrows; ++i)
    for (std::int64_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
      d[i * m.nrows + m.col_idx[k]] = m.values[k];
  return d;
}

inline std::vector<double> dense_mul(const std::vector<double>& a,
                                     std::int64_t n,
                                     const std::vector<double>& x) {
  std::vector<double> y(n, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t j = 0; j < n; ++j) s += a[i * n + j] * x[j];
    y[i] = s;
  }
  return y;
}

// Kahan-compensated dot as a summation-order-insensitive reference.
inline double compensated_dot(const std::vector<double>& x,
                              const std::vector<double>& y) {
  double sum = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = std::fma(x[i], y[i], -c);
    const double s = sum + t;
    c = (s - sum) - t;
    sum = s;
  }
  return sum;
}

// Brute-force stencil neighborhood count for one grid point.
inline int neighbor_count(const hlamkit::GridSpec& g, std::int64_t ix,
                          std::int64_t iy, std::int64_t iz) {
  int count = 0;
  const bool seven = g.stencil == hlamkit::Stencil::Seven;
  for (int sz = -1; sz <= 1; ++sz)
    for (int sy = -1; sy <= 1; ++sy)
      for (int sx = -1; sx <= 1; ++sx) {
        if (seven && sx * sx + sy * sy + sz * sz > 1) continue;
        if (ix + sx < 0 || ix + sx >= g.nx) continue;
        if (iy + sy < 0 || iy + sy >= g.ny) continue;
        if (iz + sz < 0 || iz + sz >= g.nz) continue;
        ++count;
      }
  return count;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testutil
