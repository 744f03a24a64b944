#include <doctest.h>

#include <sstream>

#include "hlamkit/errors.hpp"
#include "hlamkit/stencil.hpp"
#include "oracles.hpp"

using namespace hlamkit;

TEST_CASE("27-point 3x3x3: center row has 27 nonzeros and zero rhs") {
  const GridSpec g{3, 3, 3, Stencil::TwentySeven};
  const LinearSystem sys = generate(g);
  const std::int64_t center = 13;
  CHECK(sys.matrix.row_ptr[center + 1] - sys.matrix.row_ptr[center] == 27);
  // 26 - 26*1 from the neighborhood enumeration.
  CHECK(sys.rhs[center] == 0.0);
  CHECK(testutil::neighbor_count(g, 1, 1, 1) == 27);
}

TEST_CASE("27-point 2x2x2: all rows are corners with 8 nonzeros, rhs 19") {
  const GridSpec g{2, 2, 2, Stencil::TwentySeven};
  const LinearSystem sys = generate(g);
  for (std::int64_t i = 0; i < 8; ++i) {
    CHECK(sys.matrix.row_ptr[i + 1] - sys.matrix.row_ptr[i] == 8);
    CHECK(sys.rhs[i] == 19.0);  // 26 - 7
  }
  CHECK(average_nnz_per_row(sys.matrix) == 8.0);
}

TEST_CASE("7-point 3x3x3: 7 nonzeros in the center, 4 in corners") {
  const GridSpec g{3, 3, 3, Stencil::Seven};
  const LinearSystem sys = generate(g);
  CHECK(sys.matrix.row_ptr[14] - sys.matrix.row_ptr[13] == 7);
  CHECK(sys.matrix.row_ptr[1] - sys.matrix.row_ptr[0] == 4);
}

TEST_CASE("rhs equals matrix times ones, element-exact") {
  for (Stencil st : {Stencil::Seven, Stencil::TwentySeven}) {
    const GridSpec g{4, 3, 5, st};
    const LinearSystem sys = generate(g);
    const std::vector<double> ones(sys.matrix.nrows, 1.0);
    for (std::int64_t i = 0; i < sys.matrix.nrows; ++i) {
      double sum = 0.0;
      for (std::int64_t k = sys.matrix.row_ptr[i];
           k < sys.matrix.row_ptr[i + 1]; ++k)
        sum += sys.matrix.values[k] * ones[sys.matrix.col_idx[k]];
      CHECK(sum == sys.rhs[i]);
    }
  }
}

TEST_CASE("generated matrices are symmetric in pattern and values") {
  for (Stencil st : {Stencil::Seven, Stencil::TwentySeven}) {
    const GridSpec g{3, 4, 2, st};
    const LinearSystem sys = generate(g);
    const auto d = testutil::densify(sys.matrix);
    const std::int64_t n = sys.matrix.nrows;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j)
        REQUIRE(d[i * n + j] == d[j * n + i]);
  }
}

TEST_CASE("diagonal dominance, strict on boundary rows") {
  const GridSpec g{4, 4, 4, Stencil::TwentySeven};
  const LinearSystem sys = generate(g);
  for (std::int64_t i = 0; i < sys.matrix.nrows; ++i) {
    double offsum = 0.0;
    double diag = 0.0;
    for (std::int64_t k = sys.matrix.row_ptr[i]; k < sys.matrix.row_ptr[i + 1];
         ++k) {
      if (sys.matrix.col_idx[k] == i)
        diag = std::abs(sys.matrix.values[k]);
      else
        offsum += std::abs(sys.matrix.values[k]);
    }
    CHECK(diag >= offsum);
  }
  // A corner row is strictly dominant.
  double corner_off = 0.0;
  for (std::int64_t k = sys.matrix.row_ptr[0] + 1; k < sys.matrix.row_ptr[1];
       ++k)
    corner_off += std::abs(sys.matrix.values[k]);
  CHECK(26.0 > corner_off);
}

TEST_CASE("row order matches the grid-index bijection") {
  const GridSpec g{3, 5, 4, Stencil::Seven};
  const LinearSystem sys = generate(g);
  // row(i,j,k) = i + nx*j + nx*ny*k carries its own diagonal.
  for (std::int64_t k = 0; k < g.nz; ++k)
    for (std::int64_t j = 0; j < g.ny; ++j)
      for (std::int64_t i = 0; i < g.nx; ++i) {
        const std::int64_t row = i + g.nx * (j + g.ny * k);
        const std::int64_t dp = sys.matrix.diag_pos[row];
        CHECK(sys.matrix.col_idx[dp] == row);
        CHECK(sys.matrix.values[dp] == 26.0);
      }
}

TEST_CASE("generation is deterministic") {
  const GridSpec g{5, 4, 3, Stencil::TwentySeven};
  const LinearSystem a = generate(g);
  const LinearSystem b = generate(g);
  CHECK(a.matrix.values == b.matrix.values);
  CHECK(a.matrix.col_idx == b.matrix.col_idx);
  CHECK(a.rhs == b.rhs);
}

TEST_CASE("average nnz per row") {
  CHECK(average_nnz_per_row(generate({1, 1, 1, Stencil::Seven}).matrix) == 1.0);
  const double avg =
      average_nnz_per_row(generate({128, 128, 128, Stencil::Seven}).matrix);
  CHECK(avg > 6.8);
  CHECK(avg < 7.0);
}

TEST_CASE("dimension overflow is a generation error") {
  CHECK_THROWS_AS(generate({std::int64_t{1} << 32, std::int64_t{1} << 32, 2,
                            Stencil::Seven}),
                  GenerationError);
  CHECK_THROWS_AS(generate({0, 1, 1, Stencil::Seven}), GenerationError);
}

TEST_CASE("matrix market export shape") {
  const GridSpec g{2, 2, 1, Stencil::Seven};
  const LinearSystem sys = generate(g);
  std::ostringstream os;
  write_matrix_market(sys.matrix, os);
  const std::string text = os.str();
  CHECK(text.rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
  // 4 rows, lower triangle of a 7-pt 2x2x1 grid: 4 diagonals + 4 sub-diagonal
  // couplings.
  CHECK(text.find("4 4 8") != std::string::npos);
}
