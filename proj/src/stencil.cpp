#include "hlamkit/stencil.hpp"

#include <limits>
#include <ostream>

#include "hlamkit/errors.hpp"

namespace hlamkit {

namespace {

constexpr double kDiagonal = 26.0;
constexpr double kOffDiagonal = -1.0;

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw GenerationError(std::string("dimension overflow computing ") + what);
  return out;
}

}  // namespace

const char* stencil_name(Stencil s) {
  return s == Stencil::Seven ? "7" : "27";
}

LinearSystem generate(const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1)
    throw GenerationError("grid dimensions must be positive");

  const std::int64_t nrows =
      checked_mul(checked_mul(spec.nx, spec.ny, "nrows"), spec.nz, "nrows");
  const std::int64_t points = spec.stencil == Stencil::Seven ? 7 : 27;
  const std::int64_t max_nnz = checked_mul(nrows, points, "nnz");

  LinearSystem sys;
  CsrMatrix& m = sys.matrix;
  m.nrows = nrows;
  m.row_ptr.reserve(nrows + 1);
  m.row_ptr.push_back(0);
  m.col_idx.reserve(max_nnz);
  m.values.reserve(max_nnz);
  m.diag_pos.reserve(nrows);
  sys.rhs.reserve(nrows);
  sys.exact_solution.assign(nrows, 1.0);

  for (std::int64_t iz = 0; iz < spec.nz; ++iz) {
    for (std::int64_t iy = 0; iy < spec.ny; ++iy) {
      for (std::int64_t ix = 0; ix < spec.nx; ++ix) {
        const std::int64_t row = ix + spec.nx * (iy + spec.ny * iz);
        double row_sum = 0.0;
        for_each_neighbor(spec, ix, iy, iz, [&](std::int64_t col) {
          const double v = col == row ? kDiagonal : kOffDiagonal;
          if (col == row)
            m.diag_pos.push_back(static_cast<std::int64_t>(m.values.size()));
          m.col_idx.push_back(col);
          m.values.push_back(v);
          row_sum += v;
        });
        m.row_ptr.push_back(static_cast<std::int64_t>(m.values.size()));
        sys.rhs.push_back(row_sum);  // b = A * ones by construction
      }
    }
  }
  return sys;
}

double average_nnz_per_row(const CsrMatrix& m) {
  if (m.nrows < 1) throw GenerationError("average_nnz_per_row on empty matrix");
  return static_cast<double>(m.nnz()) / static_cast<double>(m.nrows);
}

void write_matrix_market(const CsrMatrix& m, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  std::int64_t lower = 0;
  for (std::int64_t i = 0; i < m.nrows; ++i)
    for (std::int64_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
      if (m.col_idx[k] <= i) ++lower;
  os << m.nrows << ' ' << m.nrows << ' ' << lower << '\n';
  for (std::int64_t i = 0; i < m.nrows; ++i) {
    for (std::int64_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      if (m.col_idx[k] > i) continue;
      os << i + 1 << ' ' << m.col_idx[k] + 1 << ' ' << m.values[k] << '\n';
    }
  }
}

}  // namespace hlamkit
