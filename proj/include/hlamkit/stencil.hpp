#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hlamkit {

enum class Stencil { Seven, TwentySeven };

const char* stencil_name(Stencil s);

// Structured 3D hexahedral grid. Rows are ordered x-fastest, z-slowest so a
// z-split yields contiguous row ranges: row(i,j,k) = i + nx*j + nx*ny*k.
struct GridSpec {
  std::int64_t nx = 1;
  std::int64_t ny = 1;
  std::int64_t nz = 1;
  Stencil stencil = Stencil::TwentySeven;

  std::int64_t rows() const { return nx * ny * nz; }
};

// Compressed sparse row matrix with a per-row diagonal offset cache.
struct CsrMatrix {
  std::int64_t nrows = 0;
  std::vector<std::int64_t> row_ptr;   // length nrows+1, nondecreasing
  std::vector<std::int64_t> col_idx;   // column index per nonzero
  std::vector<double> values;          // coefficient per nonzero
  std::vector<std::int64_t> diag_pos;  // per-row offset of the diagonal entry

  std::int64_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
};

struct LinearSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;             // b = A * ones, element-exact
  std::vector<double> exact_solution;  // all ones
};

// Visits the in-grid stencil neighborhood of grid point (ix,iy,iz) in
// ascending row order (the diagonal is visited as its own neighbor).
// Shared by the generator and the rank planner so halo maps are derived
// from the same pattern the matrix actually has.
template <typename Fn>
void for_each_neighbor(const GridSpec& spec, std::int64_t ix, std::int64_t iy,
                       std::int64_t iz, Fn&& fn) {
  const bool seven = spec.stencil == Stencil::Seven;
  for (std::int64_t sz = -1; sz <= 1; ++sz) {
    for (std::int64_t sy = -1; sy <= 1; ++sy) {
      for (std::int64_t sx = -1; sx <= 1; ++sx) {
        if (seven && sx * sx + sy * sy + sz * sz > 1) continue;
        const std::int64_t cx = ix + sx, cy = iy + sy, cz = iz + sz;
        if (cx < 0 || cx >= spec.nx || cy < 0 || cy >= spec.ny || cz < 0 ||
            cz >= spec.nz)
          continue;
        fn(cx + spec.nx * (cy + spec.ny * cz));
      }
    }
  }
}

// Builds the stencil system: diagonal 26, off-diagonals -1, rhs = A * ones.
LinearSystem generate(const GridSpec& spec);

double average_nnz_per_row(const CsrMatrix& m);

// Coordinate-format export (lower triangle, 1-based indices).
void write_matrix_market(const CsrMatrix& m, std::ostream& os);

}  // namespace hlamkit
