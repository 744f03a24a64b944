#include <doctest.h>

#include <random>

#include "hlamkit/errors.hpp"
#include "hlamkit/kernels.hpp"
#include "oracles.hpp"

using namespace hlamkit;

namespace {

CsrMatrix diag_matrix(std::int64_t n, double v) {
  CsrMatrix m;
  m.nrows = n;
  m.row_ptr.push_back(0);
  for (std::int64_t i = 0; i < n; ++i) {
    m.col_idx.push_back(i);
    m.values.push_back(v);
    m.diag_pos.push_back(i);
    m.row_ptr.push_back(i + 1);
  }
  return m;
}

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("spmv on a diagonal matrix") {
  const CsrMatrix m = diag_matrix(3, 26.0);
  const std::vector<double> x{1.0, 1.0, 1.0};
  std::vector<double> y(3, -1.0);
  spmv(m, x, y, {0, 3});
  CHECK(y == std::vector<double>{26.0, 26.0, 26.0});
}

TEST_CASE("spmv of ones reproduces the generated rhs") {
  const LinearSystem sys = generate({2, 2, 2, Stencil::Seven});
  const std::vector<double> ones(8, 1.0);
  std::vector<double> y(8, 0.0);
  spmv(sys.matrix, ones, y, {0, 8});
  CHECK(y == sys.rhs);
}

TEST_CASE("spmv matches the dense oracle on random input") {
  const LinearSystem sys = generate({3, 3, 3, Stencil::TwentySeven});
  const auto dense = testutil::densify(sys.matrix);
  const auto x = random_vec(27, 7);
  std::vector<double> y(27, 0.0);
  spmv(sys.matrix, x, y, {0, 27});
  const auto want = testutil::dense_mul(dense, 27, x);
  for (int i = 0; i < 27; ++i)
    CHECK(testutil::rel_err(y[i], want[i]) < 1e-13);
}

TEST_CASE("spmv range contract") {
  const CsrMatrix m = diag_matrix(4, 1.0);
  std::vector<double> x(4, 1.0), y(4, 0.0);
  CHECK_THROWS_AS(spmv(m, x, y, {0, 5}), ContractViolation);
  CHECK_THROWS_AS(spmv(m, x, y, {-1, 3}), ContractViolation);
}

TEST_CASE("spmv linearity") {
  const LinearSystem sys = generate({4, 4, 4, Stencil::Seven});
  const std::int64_t n = sys.matrix.nrows;
  const auto x = random_vec(n, 1);
  const auto y = random_vec(n, 2);
  const double a = 1.7, b = -0.4;
  std::vector<double> combo(n), ax(n), ay(n), got(n);
  for (std::int64_t i = 0; i < n; ++i) combo[i] = a * x[i] + b * y[i];
  spmv(sys.matrix, combo, got, {0, n});
  spmv(sys.matrix, x, ax, {0, n});
  spmv(sys.matrix, y, ay, {0, n});
  for (std::int64_t i = 0; i < n; ++i)
    CHECK(testutil::rel_err(got[i], a * ax[i] + b * ay[i]) < 1e-12);
}

TEST_CASE("range additivity is bit-exact for spmv, axpby, triad") {
  const LinearSystem sys = generate({4, 4, 2, Stencil::TwentySeven});
  const std::int64_t n = sys.matrix.nrows;
  const auto x = random_vec(n, 3);
  const auto y = random_vec(n, 4);

  std::vector<double> whole(n, 0.0), parts(n, 0.0);
  spmv(sys.matrix, x, whole, {0, n});
  spmv(sys.matrix, x, parts, {0, n / 3});
  spmv(sys.matrix, x, parts, {n / 3, n / 2});
  spmv(sys.matrix, x, parts, {n / 2, n});
  CHECK(whole == parts);

  std::vector<double> w1(n), w2(n);
  axpby(2.0, x, -1.0, y, w1, {0, n});
  axpby(2.0, x, -1.0, y, w2, {0, n / 2});
  axpby(2.0, x, -1.0, y, w2, {n / 2, n});
  CHECK(w1 == w2);

  std::vector<double> z1 = y, z2 = y;
  triad(0.5, x, 2.0, y, -1.0, z1, {0, n});
  triad(0.5, x, 2.0, y, -1.0, z2, {0, n / 4});
  triad(0.5, x, 2.0, y, -1.0, z2, {n / 4, n});
  CHECK(z1 == z2);
}

TEST_CASE("dot basics and blocked-sum accuracy") {
  std::vector<double> zeros(8, 0.0), ones(8, 1.0);
  CHECK(dot_block(zeros, ones, {0, 8}) == 0.0);
  CHECK(dot_block(ones, ones, {0, 8}) == 8.0);

  const auto x = random_vec(1000, 11);
  const auto y = random_vec(1000, 12);
  double blocked = 0.0;
  for (int b = 0; b < 10; ++b)
    blocked += dot_block(x, y, {b * 100, (b + 1) * 100});
  const double single = dot_block(x, y, {0, 1000});
  const double reference = testutil::compensated_dot(x, y);
  CHECK(testutil::rel_err(blocked, reference) < 1e-12);
  CHECK(testutil::rel_err(single, reference) < 1e-12);
}

TEST_CASE("axpby identities") {
  const auto x = random_vec(32, 5);
  const auto y = random_vec(32, 6);
  std::vector<double> w(32);
  axpby(1.0, x, 0.0, y, w, {0, 32});
  CHECK(w == x);
  axpby(0.0, x, 1.0, y, w, {0, 32});
  CHECK(w == y);
  std::vector<double> ones(32, 1.0);
  axpby(2.0, ones, -1.0, ones, w, {0, 32});
  CHECK(w == ones);
}

TEST_CASE("triad against the three-pass oracle") {
  const auto x = random_vec(64, 8);
  const auto y = random_vec(64, 9);
  const auto z0 = random_vec(64, 10);

  std::vector<double> z = z0;
  triad(0.0, x, 0.0, y, 1.0, z, {0, 64});
  CHECK(z == z0);

  z = z0;
  triad(1.5, x, -2.0, y, 0.0, z, {0, 64});
  std::vector<double> w(64);
  axpby(1.5, x, -2.0, y, w, {0, 64});
  CHECK(z == w);

  z = z0;
  const double a = 0.3, b = -1.1, c = 2.2;
  triad(a, x, b, y, c, z, {0, 64});
  for (int i = 0; i < 64; ++i) {
    double t = a * x[i];
    t += b * y[i];
    t += c * z0[i];
    CHECK(testutil::rel_err(z[i], t) < 1e-15);
  }
}

TEST_CASE("access-count model formulas") {
  CHECK(estimate_accesses(KrylovMethod::Cg, 0.0, 1) == 12.0);
  const double cg = estimate_accesses(KrylovMethod::Cg, 7.0, 100);
  const double cgnb = estimate_accesses(KrylovMethod::CgNb, 7.0, 100);
  CHECK((cgnb - cg) / cg == 3.0 / 19.0);  // ~15.8%
  const double bs = estimate_accesses(KrylovMethod::BiCgStab, 7.0, 100);
  const double b1 = estimate_accesses(KrylovMethod::BiCgStabB1, 7.0, 100);
  CHECK((b1 - bs) / bs == 3.0 / 35.0);  // ~8.6%
}

TEST_CASE("access counters see the expected spmv footprint") {
  const LinearSystem sys = generate({4, 4, 4, Stencil::Seven});
  const std::int64_t n = sys.matrix.nrows;
  const auto x = random_vec(n, 13);
  std::vector<double> y(n);
  AccessCounter counter;
  spmv(sys.matrix, x, y, {0, n}, &counter);
  CHECK(counter.elements_read.load() ==
        static_cast<std::uint64_t>(sys.matrix.nnz() + n));
  CHECK(counter.elements_written.load() == static_cast<std::uint64_t>(n));
  // Null counter leaves counts untouched (disabled semantics).
  spmv(sys.matrix, x, y, {0, n}, nullptr);
  CHECK(counter.elements_read.load() ==
        static_cast<std::uint64_t>(sys.matrix.nnz() + n));
}

TEST_CASE("gauss-seidel sweeps agree with their relaxed twins when serial") {
  const LinearSystem sys = generate({3, 3, 3, Stencil::Seven});
  const std::int64_t n = sys.matrix.nrows;
  std::vector<double> a(n, 0.0), b(n, 0.0);
  gs_forward(sys.matrix, a, sys.rhs, {0, n});
  gs_forward_relaxed(sys.matrix, b, sys.rhs, {0, n});
  CHECK(a == b);
  gs_backward(sys.matrix, a, sys.rhs, {0, n});
  gs_backward_relaxed(sys.matrix, b, sys.rhs, {0, n});
  CHECK(a == b);
}
