#include "hlamkit/partition.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <sstream>

#include "hlamkit/errors.hpp"

namespace hlamkit {

std::vector<Block> split(std::int64_t n, std::int64_t parts,
                         std::int64_t simd_width) {
  assert(n >= 0 && parts >= 1 && simd_width >= 1);
  const std::int64_t units = n / simd_width;  // aligned chunks
  const std::int64_t tail = n - units * simd_width;
  const std::int64_t base = units / parts;
  const std::int64_t extra = units % parts;

  std::vector<Block> blocks;
  blocks.reserve(parts);
  std::int64_t start = 0;
  for (std::int64_t p = 0; p < parts; ++p) {
    std::int64_t size = (base + (p < extra ? 1 : 0)) * simd_width;
    if (p == parts - 1) size += tail;  // last block absorbs the remainder
    blocks.push_back({start, size});
    start += size;
  }
  return blocks;
}

TaskPlan plan_tasks(const CsrMatrix& local_matrix, std::int64_t task_count,
                    std::int64_t simd_width, std::int64_t gap_threshold) {
  if (task_count < 1) throw PlanError("task_count must be >= 1");
  if (simd_width < 1) throw PlanError("simd_width must be >= 1");

  TaskPlan plan;
  plan.simd_width = simd_width;
  plan.blocks = split(local_matrix.nrows, task_count, simd_width);
  plan.spmv_deps.resize(plan.blocks.size());

  std::vector<std::int64_t> cols;
  for (std::size_t t = 0; t < plan.blocks.size(); ++t) {
    const Block& b = plan.blocks[t];
    if (b.size == 0) continue;
    cols.clear();
    cols.assign(local_matrix.col_idx.begin() + local_matrix.row_ptr[b.start],
                local_matrix.col_idx.begin() +
                    local_matrix.row_ptr[b.start + b.size]);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    auto& regions = plan.spmv_deps[t];
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (!regions.empty() &&
          cols[i] - (regions.back().offset + regions.back().length) <=
              gap_threshold) {
        regions.back().length = cols[i] - regions.back().offset + 1;
      } else {
        regions.push_back({cols[i], 1});
      }
    }
  }
  return plan;
}

ColorPlan plan_colors(const TaskPlan& tasks, int colors) {
  if (colors < 1) throw PlanError("colors must be >= 1");
  ColorPlan plan;
  plan.color_count = colors;
  plan.task_color.resize(tasks.blocks.size());
  for (std::size_t i = 0; i < plan.task_color.size(); ++i)
    plan.task_color[i] = static_cast<int>(i % colors);
  return plan;
}

namespace {

// Owned z-planes per rank: contiguous, first nz % ranks ranks get one extra.
std::pair<std::int64_t, std::int64_t> plane_range(std::int64_t nz, int ranks,
                                                  int rank) {
  const std::int64_t base = nz / ranks;
  const std::int64_t extra = nz % ranks;
  const std::int64_t begin =
      rank * base + std::min<std::int64_t>(rank, extra);
  const std::int64_t count = base + (rank < extra ? 1 : 0);
  return {begin, begin + count};
}

}  // namespace

RankPlan plan_ranks(const GridSpec& spec, int rank_count) {
  if (rank_count < 1) throw PlanError("rank_count must be >= 1");
  if (rank_count > spec.nz)
    throw PlanError("rank_count exceeds grid planes; a rank would own zero "
                    "planes");

  RankPlan plan;
  plan.grid = spec;
  plan.rank_count = rank_count;
  plan.ranks.resize(rank_count);

  const std::int64_t plane = spec.nx * spec.ny;
  std::vector<std::pair<std::int64_t, std::int64_t>> planes(rank_count);
  for (int r = 0; r < rank_count; ++r)
    planes[r] = plane_range(spec.nz, rank_count, r);

  auto owner_of_plane = [&](std::int64_t z) {
    for (int r = 0; r < rank_count; ++r)
      if (z >= planes[r].first && z < planes[r].second) return r;
    return -1;
  };

  for (int r = 0; r < rank_count; ++r) {
    RankSlab& slab = plan.ranks[r];
    slab.row_begin = planes[r].first * plane;
    slab.row_end = planes[r].second * plane;

    // Externals this rank reads, grouped by owner, derived from the stencil
    // neighborhood of the owned rows.
    std::map<int, std::set<std::int64_t>> externals;
    for (std::int64_t iz = planes[r].first; iz < planes[r].second; ++iz) {
      if (iz != planes[r].first && iz != planes[r].second - 1)
        continue;  // only boundary planes can reference other ranks
      for (std::int64_t iy = 0; iy < spec.ny; ++iy) {
        for (std::int64_t ix = 0; ix < spec.nx; ++ix) {
          for_each_neighbor(spec, ix, iy, iz, [&](std::int64_t col) {
            if (col >= slab.row_begin && col < slab.row_end) return;
            const int owner = owner_of_plane(col / plane);
            externals[owner].insert(col);
          });
        }
      }
    }

    std::int64_t offset = slab.local_nrows();
    for (auto& [owner, cols] : externals) {
      NeighborExchange ex;
      ex.neighbor = owner;
      ex.recv_offset = offset;
      ex.recv_count = static_cast<std::int64_t>(cols.size());
      offset += ex.recv_count;
      slab.neighbors.push_back(std::move(ex));
    }
    slab.halo_size = offset - slab.local_nrows();
  }

  // What rank r receives from q is exactly what q must send to r.
  for (int r = 0; r < rank_count; ++r) {
    for (NeighborExchange& ex : plan.ranks[r].neighbors) {
      // Recompute the external set for placement order (ascending global).
      std::set<std::int64_t> cols;
      const auto& pr = planes[r];
      for (std::int64_t iz = pr.first; iz < pr.second; ++iz) {
        if (iz != pr.first && iz != pr.second - 1) continue;
        for (std::int64_t iy = 0; iy < spec.ny; ++iy)
          for (std::int64_t ix = 0; ix < spec.nx; ++ix)
            for_each_neighbor(spec, ix, iy, iz, [&](std::int64_t col) {
              if (col >= plan.ranks[r].row_begin &&
                  col < plan.ranks[r].row_end)
                return;
              if (owner_of_plane(col / plane) == ex.neighbor)
                cols.insert(col);
            });
      }
      NeighborExchange* back = nullptr;
      for (NeighborExchange& peer : plan.ranks[ex.neighbor].neighbors)
        if (peer.neighbor == r) back = &peer;
      assert(back && "exchange symmetry");
      back->send_rows.clear();
      back->send_rows.reserve(cols.size());
      const std::int64_t peer_begin = plan.ranks[ex.neighbor].row_begin;
      for (std::int64_t col : cols) back->send_rows.push_back(col - peer_begin);
    }
  }
  return plan;
}

LocalSystem build_local_system(const LinearSystem& global,
                               const RankPlan& plan, int rank) {
  const RankSlab& slab = plan.ranks.at(rank);
  const CsrMatrix& g = global.matrix;

  // Global column -> local slot. Own rows shift by row_begin; externals map
  // to tail slots in neighbor-then-ascending-column order (matching the
  // sender's gather order).
  std::map<std::int64_t, std::int64_t> external_slot;
  for (const NeighborExchange& ex : slab.neighbors) {
    const RankSlab& peer = plan.ranks.at(ex.neighbor);
    const NeighborExchange* toward = nullptr;
    for (const NeighborExchange& pe : peer.neighbors)
      if (pe.neighbor == rank) toward = &pe;
    if (!toward || static_cast<std::int64_t>(toward->send_rows.size()) !=
                       ex.recv_count)
      throw PlanError("asymmetric exchange plan");
    for (std::int64_t i = 0; i < ex.recv_count; ++i) {
      const std::int64_t global_col = peer.row_begin + toward->send_rows[i];
      external_slot[global_col] = ex.recv_offset + i;
    }
  }

  LocalSystem local;
  local.row_begin = slab.row_begin;
  local.local_nrows = slab.local_nrows();
  local.halo_size = slab.halo_size;

  CsrMatrix& m = local.matrix;
  m.nrows = local.local_nrows;
  m.row_ptr.reserve(m.nrows + 1);
  m.row_ptr.push_back(0);
  m.diag_pos.reserve(m.nrows);
  local.rhs.reserve(m.nrows);

  for (std::int64_t gi = slab.row_begin; gi < slab.row_end; ++gi) {
    const std::int64_t li = gi - slab.row_begin;
    // Entries keep the global column order so distributed SpMV sums round
    // identically to the global kernel.
    for (std::int64_t k = g.row_ptr[gi]; k < g.row_ptr[gi + 1]; ++k) {
      const std::int64_t gc = g.col_idx[k];
      std::int64_t lc;
      if (gc >= slab.row_begin && gc < slab.row_end) {
        lc = gc - slab.row_begin;
      } else {
        auto it = external_slot.find(gc);
        if (it == external_slot.end())
          throw PlanError("matrix references a column outside the halo plan");
        lc = it->second;
      }
      if (gc == gi)
        m.diag_pos.push_back(static_cast<std::int64_t>(m.values.size()));
      m.col_idx.push_back(lc);
      m.values.push_back(g.values[k]);
    }
    m.row_ptr.push_back(static_cast<std::int64_t>(m.values.size()));
    local.rhs.push_back(global.rhs[gi]);
  }
  return local;
}

namespace {

void append_regions(std::ostringstream& os,
                    const std::vector<DepRegion>& regions) {
  os << '[';
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (i) os << ',';
    os << '[' << regions[i].offset << ',' << regions[i].length << ']';
  }
  os << ']';
}

}  // namespace

std::string to_json(const RankPlan& plan) {
  std::ostringstream os;
  os << "{\"rank_count\":" << plan.rank_count << ",\"grid\":\"" << plan.grid.nx
     << 'x' << plan.grid.ny << 'x' << plan.grid.nz << "\",\"stencil\":"
     << stencil_name(plan.grid.stencil) << ",\"ranks\":[";
  for (int r = 0; r < plan.rank_count; ++r) {
    const RankSlab& s = plan.ranks[r];
    if (r) os << ',';
    os << "{\"rows\":[" << s.row_begin << ',' << s.row_end
       << "],\"halo_size\":" << s.halo_size << ",\"neighbors\":[";
    for (std::size_t n = 0; n < s.neighbors.size(); ++n) {
      const NeighborExchange& ex = s.neighbors[n];
      if (n) os << ',';
      os << "{\"rank\":" << ex.neighbor
         << ",\"send_count\":" << ex.send_rows.size()
         << ",\"recv_offset\":" << ex.recv_offset
         << ",\"recv_count\":" << ex.recv_count << '}';
    }
    os << "]}";
  }
  os << "]}";
  return os.str();
}

std::string to_json(const TaskPlan& plan, const ColorPlan* colors) {
  std::ostringstream os;
  os << "{\"simd_width\":" << plan.simd_width << ",\"tasks\":[";
  for (std::size_t t = 0; t < plan.blocks.size(); ++t) {
    if (t) os << ',';
    os << "{\"start\":" << plan.blocks[t].start
       << ",\"size\":" << plan.blocks[t].size << ",\"reads\":";
    append_regions(os, plan.spmv_deps[t]);
    if (colors) os << ",\"color\":" << colors->task_color[t];
    os << '}';
  }
  os << "]}";
  return os.str();
}

}  // namespace hlamkit
