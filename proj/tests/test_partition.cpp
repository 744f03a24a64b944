#include <doctest.h>

#include <numeric>
#include <set>

#include "hlamkit/errors.hpp"
#include "hlamkit/kernels.hpp"
#include "hlamkit/partition.hpp"

using namespace hlamkit;

namespace {

void check_split_contract(std::int64_t n, std::int64_t parts,
                          std::int64_t simd) {
  const auto blocks = split(n, parts, simd);
  REQUIRE(static_cast<std::int64_t>(blocks.size()) == parts);
  std::int64_t sum = 0, pos = 0;
  std::int64_t nonfinal_min = -1, nonfinal_max = -1;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    REQUIRE(blocks[i].start == pos);
    REQUIRE(blocks[i].size >= 0);
    REQUIRE(blocks[i].start % simd == 0);
    if (i + 1 < blocks.size()) {
      REQUIRE(blocks[i].size % simd == 0);
      if (nonfinal_min < 0 || blocks[i].size < nonfinal_min)
        nonfinal_min = blocks[i].size;
      if (blocks[i].size > nonfinal_max) nonfinal_max = blocks[i].size;
    }
    pos += blocks[i].size;
    sum += blocks[i].size;
  }
  REQUIRE(sum == n);
  if (nonfinal_min >= 0) REQUIRE(nonfinal_max - nonfinal_min <= simd);
  // Empty blocks only when parts exceed the aligned chunk count.
  const std::int64_t chunks = (n + simd - 1) / simd;
  const bool has_empty =
      std::any_of(blocks.begin(), blocks.end(),
                  [](const Block& b) { return b.size == 0; });
  if (has_empty) REQUIRE(parts > chunks);
}

}  // namespace

TEST_CASE("split exact division") {
  const auto b = split(32, 4, 8);
  REQUIRE(b.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(b[i].start == i * 8);
    CHECK(b[i].size == 8);
  }
}

TEST_CASE("split alignment with remainder") {
  check_split_contract(100, 4, 8);
  const auto b = split(100, 4, 8);
  std::int64_t total = 0;
  for (const Block& blk : b) total += blk.size;
  CHECK(total == 100);
  CHECK(b.back().start + b.back().size == 100);
}

TEST_CASE("split degenerate: more parts than chunks") {
  const auto b = split(7, 8, 8);
  std::int64_t total = 0;
  int nonempty = 0;
  for (const Block& blk : b) {
    total += blk.size;
    if (blk.size > 0) ++nonempty;
  }
  CHECK(total == 7);
  CHECK(nonempty == 1);
}

TEST_CASE("split contract over the full parameter sweep") {
  for (std::int64_t simd : {1, 4, 8, 16})
    for (std::int64_t parts = 1; parts <= 64; ++parts)
      for (std::int64_t n : {0, 1, 5, 7, 8, 17, 63, 64, 100, 1000, 9999,
                             10000})
        check_split_contract(n, parts, simd);
}

TEST_CASE("plan_tasks single task covers the column span") {
  const LinearSystem sys = generate({3, 3, 3, Stencil::Seven});
  const TaskPlan plan = plan_tasks(sys.matrix, 1, 1);
  REQUIRE(plan.blocks.size() == 1);
  REQUIRE(plan.spmv_deps[0].size() == 1);
  CHECK(plan.spmv_deps[0][0].offset == 0);
  CHECK(plan.spmv_deps[0][0].length == 27);
}

TEST_CASE("plan_tasks middle block reads the neighbor planes") {
  const LinearSystem sys = generate({3, 3, 3, Stencil::Seven});
  const TaskPlan plan = plan_tasks(sys.matrix, 3, 1);
  REQUIRE(plan.blocks.size() == 3);
  CHECK(plan.blocks[1].start == 9);
  CHECK(plan.blocks[1].size == 9);
  // Rows 9..17 reference rows 0..26; gap coalescing folds that into one
  // region.
  REQUIRE(plan.spmv_deps[1].size() == 1);
  CHECK(plan.spmv_deps[1][0].offset == 0);
  CHECK(plan.spmv_deps[1][0].length == 27);
}

TEST_CASE("plan_tasks dep regions jointly cover all referenced columns") {
  const LinearSystem sys = generate({4, 4, 4, Stencil::TwentySeven});
  const TaskPlan plan = plan_tasks(sys.matrix, 5, 4);
  std::set<std::int64_t> covered;
  for (const auto& regions : plan.spmv_deps)
    for (const DepRegion& r : regions)
      for (std::int64_t c = r.offset; c < r.offset + r.length; ++c)
        covered.insert(c);
  for (std::int64_t c : sys.matrix.col_idx) CHECK(covered.count(c) == 1);
}

TEST_CASE("plan_tasks dep regions are minimal up to the gap threshold") {
  const LinearSystem sys = generate({8, 8, 8, Stencil::Seven});
  const std::int64_t gap = 16;
  const TaskPlan plan = plan_tasks(sys.matrix, 8, 8, gap);
  for (std::size_t t = 0; t < plan.blocks.size(); ++t) {
    std::set<std::int64_t> referenced;
    const Block& b = plan.blocks[t];
    for (std::int64_t i = b.start; i < b.start + b.size; ++i)
      for (std::int64_t k = sys.matrix.row_ptr[i];
           k < sys.matrix.row_ptr[i + 1]; ++k)
        referenced.insert(sys.matrix.col_idx[k]);
    for (const DepRegion& r : plan.spmv_deps[t]) {
      // Any column in a region is within gap of a referenced column.
      for (std::int64_t c = r.offset; c < r.offset + r.length; ++c) {
        auto it = referenced.lower_bound(c - gap);
        REQUIRE(it != referenced.end());
        REQUIRE(*it <= c + gap);
      }
    }
  }
}

TEST_CASE("plan_colors assigns round-robin colors") {
  const LinearSystem sys = generate({4, 4, 4, Stencil::Seven});
  const TaskPlan plan4 = plan_tasks(sys.matrix, 4, 1);
  CHECK(plan_colors(plan4, 2).task_color == std::vector<int>{0, 1, 0, 1});
  CHECK(plan_colors(plan4, 1).task_color == std::vector<int>{0, 0, 0, 0});
  const TaskPlan plan5 = plan_tasks(sys.matrix, 5, 1);
  CHECK(plan_colors(plan5, 3).task_color == std::vector<int>{0, 1, 2, 0, 1});
}

TEST_CASE("plan_ranks 7-point: plane-sized exchange sets") {
  const GridSpec g{4, 4, 8, Stencil::Seven};
  const RankPlan plan = plan_ranks(g, 2);
  REQUIRE(plan.ranks.size() == 2);
  for (int r = 0; r < 2; ++r) {
    CHECK(plan.ranks[r].local_nrows() == 64);
    REQUIRE(plan.ranks[r].neighbors.size() == 1);
    CHECK(plan.ranks[r].neighbors[0].send_rows.size() == 16);
    CHECK(plan.ranks[r].neighbors[0].recv_count == 16);
    CHECK(plan.ranks[r].halo_size == 16);
    CHECK(plan.ranks[r].neighbors[0].recv_offset == 64);
  }
  CHECK(plan.ranks[0].neighbors[0].neighbor == 1);
  CHECK(plan.ranks[1].neighbors[0].neighbor == 0);
}

TEST_CASE("plan_ranks 27-point: full boundary plane exchanged") {
  const GridSpec g{4, 4, 8, Stencil::TwentySeven};
  const RankPlan plan = plan_ranks(g, 2);
  for (int r = 0; r < 2; ++r) {
    CHECK(plan.ranks[r].neighbors[0].send_rows.size() == 16);
    CHECK(plan.ranks[r].neighbors[0].recv_count == 16);
  }
}

TEST_CASE("plan_ranks single rank has no exchanges") {
  const RankPlan plan = plan_ranks({4, 4, 8, Stencil::Seven}, 1);
  CHECK(plan.ranks[0].neighbors.empty());
  CHECK(plan.ranks[0].halo_size == 0);
}

TEST_CASE("plan_ranks rejects more ranks than planes") {
  CHECK_THROWS_AS(plan_ranks({4, 4, 2, Stencil::Seven}, 3), PlanError);
}

TEST_CASE("owned ranges partition the rows for non-dividing counts") {
  const GridSpec g{2, 2, 7, Stencil::Seven};
  const RankPlan plan = plan_ranks(g, 3);
  std::int64_t pos = 0;
  for (const RankSlab& s : plan.ranks) {
    CHECK(s.row_begin == pos);
    pos = s.row_end;
    CHECK(s.local_nrows() % 4 == 0);  // whole planes only
  }
  CHECK(pos == g.rows());
}

TEST_CASE("distributed spmv equals global spmv bit-exactly") {
  for (Stencil st : {Stencil::Seven, Stencil::TwentySeven}) {
    const GridSpec g{4, 4, 8, st};
    const LinearSystem sys = generate(g);
    std::vector<double> x(sys.matrix.nrows);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = 0.25 * static_cast<double>(i % 17) - 1.1;
    std::vector<double> want(sys.matrix.nrows, 0.0);
    spmv(sys.matrix, x, want, {0, sys.matrix.nrows});

    for (int ranks : {1, 2, 4, 8}) {
      const RankPlan plan = plan_ranks(g, ranks);
      std::vector<double> got(sys.matrix.nrows, 0.0);
      for (int r = 0; r < ranks; ++r) {
        const LocalSystem local = build_local_system(sys, plan, r);
        std::vector<double> lx(local.local_nrows + local.halo_size, 0.0);
        for (std::int64_t i = 0; i < local.local_nrows; ++i)
          lx[i] = x[local.row_begin + i];
        for (const NeighborExchange& ex : plan.ranks[r].neighbors) {
          const RankSlab& peer = plan.ranks[ex.neighbor];
          const NeighborExchange* toward = nullptr;
          for (const NeighborExchange& pe : peer.neighbors)
            if (pe.neighbor == r) toward = &pe;
          REQUIRE(toward != nullptr);
          for (std::int64_t i = 0; i < ex.recv_count; ++i)
            lx[ex.recv_offset + i] = x[peer.row_begin + toward->send_rows[i]];
        }
        std::vector<double> ly(local.local_nrows, 0.0);
        spmv(local.matrix, lx, ly, {0, local.local_nrows});
        for (std::int64_t i = 0; i < local.local_nrows; ++i)
          got[local.row_begin + i] = ly[i];
      }
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("local rhs matches the global slice") {
  const GridSpec g{3, 3, 6, Stencil::TwentySeven};
  const LinearSystem sys = generate(g);
  const RankPlan plan = plan_ranks(g, 3);
  for (int r = 0; r < 3; ++r) {
    const LocalSystem local = build_local_system(sys, plan, r);
    for (std::int64_t i = 0; i < local.local_nrows; ++i)
      CHECK(local.rhs[i] == sys.rhs[local.row_begin + i]);
  }
}

TEST_CASE("plan json dumps are well-formed enough to grep") {
  const GridSpec g{4, 4, 4, Stencil::Seven};
  const RankPlan rp = plan_ranks(g, 2);
  const std::string j = to_json(rp);
  CHECK(j.find("\"rank_count\":2") != std::string::npos);
  const LinearSystem sys = generate(g);
  const TaskPlan tp = plan_tasks(sys.matrix, 4, 8);
  const ColorPlan cp = plan_colors(tp, 2);
  const std::string tj = to_json(tp, &cp);
  CHECK(tj.find("\"color\":1") != std::string::npos);
}
