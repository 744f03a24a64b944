#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlamkit/stencil.hpp"

namespace hlamkit {

struct Block {
  std::int64_t start = 0;
  std::int64_t size = 0;
};

// Partitions [0,n) into `parts` blocks whose starts are multiples of
// simd_width; the final block absorbs the unaligned tail. Empty blocks occur
// only when parts > ceil(n / simd_width).
std::vector<Block> split(std::int64_t n, std::int64_t parts,
                         std::int64_t simd_width);

struct DepRegion {
  std::int64_t offset = 0;
  std::int64_t length = 0;
};

// Per-rank task plan: row blocks plus the x-regions each block's rows read
// through the matrix (the multidata dependency of the SpMV kernel).
struct TaskPlan {
  std::vector<Block> blocks;
  std::vector<std::vector<DepRegion>> spmv_deps;  // per block, coalesced
  std::int64_t simd_width = 8;
  std::int64_t task_count() const {
    return static_cast<std::int64_t>(blocks.size());
  }
};

// Referenced-column runs separated by gaps <= gap_threshold merge into one
// region, bounding dependency-list length.
TaskPlan plan_tasks(const CsrMatrix& local_matrix, std::int64_t task_count,
                    std::int64_t simd_width, std::int64_t gap_threshold = 16);

struct ColorPlan {
  int color_count = 1;
  std::vector<int> task_color;  // task i -> i mod color_count
};

ColorPlan plan_colors(const TaskPlan& tasks, int colors);

struct NeighborExchange {
  int neighbor = -1;
  // Local indices of owned rows the neighbor reads, ascending (== ascending
  // global row order); the send payload is gathered in this order.
  std::vector<std::int64_t> send_rows;
  // Placement of the values received from this neighbor at the tail of the
  // local vector, in the sender's gather order.
  std::int64_t recv_offset = 0;
  std::int64_t recv_count = 0;
};

struct RankSlab {
  std::int64_t row_begin = 0;  // owned global rows [row_begin, row_end)
  std::int64_t row_end = 0;
  std::vector<NeighborExchange> neighbors;  // ascending neighbor rank
  std::int64_t halo_size = 0;

  std::int64_t local_nrows() const { return row_end - row_begin; }
};

// Contiguous z-slab decomposition. Exchange sets are derived from the
// stencil neighborhood, not hard-coded plane sizes.
struct RankPlan {
  GridSpec grid;
  int rank_count = 1;
  std::vector<RankSlab> ranks;
};

RankPlan plan_ranks(const GridSpec& spec, int rank_count);

// Rank-local view of the system. Owned rows are renumbered to
// [0, local_nrows); external columns map to tail slots
// [local_nrows, local_nrows + halo_size) in neighbor-then-offset order.
// Row entries keep the global column order (tail slots may therefore appear
// before own columns within a row), which keeps distributed SpMV sums
// bit-identical to the global kernel.
struct LocalSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::int64_t row_begin = 0;
  std::int64_t local_nrows = 0;
  std::int64_t halo_size = 0;
};

LocalSystem build_local_system(const LinearSystem& global,
                               const RankPlan& plan, int rank);

// Debug dumps for the --dump-plan CLI flag.
std::string to_json(const RankPlan& plan);
std::string to_json(const TaskPlan& plan, const ColorPlan* colors = nullptr);

}  // namespace hlamkit
