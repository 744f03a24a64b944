#include <doctest.h>

#include <sstream>

#include "hlamkit/bench.hpp"

using namespace hlamkit;

namespace {

BenchSpec small_weak_spec() {
  BenchSpec spec;
  spec.mode = BenchMode::Weak;
  spec.base_grid = {4, 4, 4, Stencil::Seven};
  spec.rank_counts = {1, 2};
  spec.backends = {Backend::Sequential};
  spec.methods = {Method::Cg};
  spec.repetitions = 2;
  spec.workers = 1;
  return spec;
}

}  // namespace

TEST_CASE("lower median and nearest-rank quartiles") {
  CHECK(lower_median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(lower_median({4.0, 1.0, 2.0, 3.0}) == 2.0);  // lower of {2,3}
  CHECK(quartile({1.0, 2.0, 3.0, 4.0}, 1) == 1.0);
  CHECK(quartile({1.0, 2.0, 3.0, 4.0}, 3) == 3.0);
  CHECK(lower_median({5.0}) == 5.0);
  CHECK(quartile({5.0}, 1) == 5.0);
  CHECK(quartile({5.0}, 3) == 5.0);
}

TEST_CASE("weak sweep produces one cell per rank count with reference 1.0") {
  const EfficiencyTable t = run_bench(small_weak_spec());
  REQUIRE(t.cells.size() == 2);
  CHECK(t.cells[0].ranks == 1);
  CHECK(t.cells[0].valid);
  CHECK(t.cells[0].efficiency == doctest::Approx(1.0));
  CHECK(t.cells[1].valid);
  // Deterministic iteration counts recorded per rep.
  for (const BenchSample& s : t.samples) {
    CHECK(s.ok);
    CHECK(s.iterations >= 1);
  }
  const int iters0 = t.samples[0].iterations;
  CHECK(t.samples[1].iterations == iters0);
}

TEST_CASE("repetitions=1 collapses quartiles onto the single sample") {
  BenchSpec spec = small_weak_spec();
  spec.rank_counts = {1};
  spec.repetitions = 1;
  const EfficiencyTable t = run_bench(spec);
  REQUIRE(t.cells.size() == 1);
  CHECK(t.cells[0].median_seconds == t.cells[0].q1_seconds);
  CHECK(t.cells[0].median_seconds == t.cells[0].q3_seconds);
  CHECK(t.cells[0].median_seconds == t.cells[0].min_seconds);
  CHECK(t.cells[0].median_seconds == t.cells[0].max_seconds);
}

TEST_CASE("csv schema is stable and round-trips through the json summary") {
  const EfficiencyTable t = run_bench(small_weak_spec());
  std::ostringstream samples, summary;
  write_samples_csv(t, samples);
  write_summary_csv(t, summary);
  CHECK(samples.str().rfind("method,backend,ranks,rep,seconds,iterations",
                            0) == 0);
  CHECK(summary.str().rfind(
            "method,backend,ranks,samples,median_s,q1_s,q3_s,min_s,max_s,"
            "efficiency",
            0) == 0);
  // Every CSV sample row appears in the JSON summary with the same values.
  const std::string j = to_json(t);
  for (const BenchSample& s : t.samples) {
    CHECK(j.find("\"method\": \"" + s.method + "\"") != std::string::npos);
  }
  std::size_t cell_count = 0;
  std::size_t pos = 0;
  while ((pos = j.find("\"median_s\"", pos)) != std::string::npos) {
    ++cell_count;
    pos += 1;
  }
  CHECK(cell_count == t.cells.size());
}

TEST_CASE("strong mode keeps the grid fixed and scales the denominator") {
  BenchSpec spec = small_weak_spec();
  spec.mode = BenchMode::Strong;
  spec.base_grid = {4, 4, 8, Stencil::Seven};
  spec.rank_counts = {1, 2};
  const EfficiencyTable t = run_bench(spec);
  REQUIRE(t.cells.size() == 2);
  CHECK(t.cells[0].efficiency == doctest::Approx(1.0));
  // Efficiency definition: E(n) = T_ref * n_ref / (n * T(n)).
  const double expect =
      t.cells[0].median_seconds / (2.0 * t.cells[1].median_seconds);
  CHECK(t.cells[1].efficiency == doctest::Approx(expect));
}

TEST_CASE("a failing cell is marked invalid without aborting the sweep") {
  BenchSpec spec = small_weak_spec();
  spec.solver.max_iterations = 1;  // cg cannot converge in one step
  const EfficiencyTable t = run_bench(spec);
  REQUIRE(t.cells.size() == 2);
  for (const BenchCell& c : t.cells) CHECK_FALSE(c.valid);
  for (const BenchSample& s : t.samples) {
    CHECK_FALSE(s.ok);
    CHECK_FALSE(s.error.empty());
  }
  std::ostringstream os;
  write_samples_csv(t, os);  // failed reps omitted from the sample CSV
  CHECK(os.str() == "method,backend,ranks,rep,seconds,iterations\n");
}
