#include "hlamkit/engine.hpp"

#include <algorithm>
#include <cassert>

#include "hlamkit/errors.hpp"
#include "hlamkit/kernels.hpp"

namespace hlamkit {

namespace {

constexpr BufferId kSlotBuffer = 0;
constexpr BufferId kPartialBuffer = 1;
constexpr BufferId kFirstVector = 2;

std::vector<BufferRegion> coalesce_rows(BufferId buf,
                                        const std::vector<std::int64_t>& rows) {
  std::vector<BufferRegion> out;
  for (std::int64_t r : rows) {
    if (!out.empty() && out.back().offset + out.back().length == r)
      ++out.back().length;
    else
      out.push_back({buf, r, 1});
  }
  return out;
}

}  // namespace

Engine::Engine(const Setup& setup)
    : backend_(setup.backend),
      rank_(setup.rank),
      system_(setup.system),
      slab_(setup.slab),
      tasks_(setup.tasks),
      fabric_(setup.fabric),
      count_accesses_(setup.count_accesses),
      clock_(setup.clock ? setup.clock : Tracer::make_clock()),
      slot_capacity_(setup.slot_capacity) {
  assert(system_ && slab_ && tasks_ && fabric_);
  const int lanes = std::max(setup.workers, 1);
  tracer_ = std::make_unique<Tracer>(rank_, clock_, lanes);
  exec_ = make_executor(backend_, rank_, setup.workers, *tracer_, fabric_,
                        [this](int iter) { return counter_for(iter); });
  slot_values_.assign(slot_capacity_, 0.0);
  slot_written_ = std::make_unique<std::atomic<bool>[]>(slot_capacity_);
  for (std::size_t i = 0; i < slot_capacity_; ++i)
    slot_written_[i].store(false, std::memory_order_relaxed);
  partials_.assign(8192, 0.0);
  relaxed_forward_ids_.assign(tasks_->blocks.size(), 0);
}

Engine::~Engine() = default;

int Engine::rank_count() const { return fabric_->ranks(); }

BufferId Engine::new_vector(std::string name, bool with_halo) {
  const std::int64_t n =
      system_->local_nrows + (with_halo ? system_->halo_size : 0);
  vectors_.emplace_back(static_cast<std::size_t>(n), 0.0);
  vector_names_.push_back(std::move(name));
  return kFirstVector + static_cast<BufferId>(vectors_.size() - 1);
}

std::span<double> Engine::values(BufferId id) {
  return vectors_.at(id - kFirstVector);
}

std::span<const double> Engine::values(BufferId id) const {
  return vectors_.at(id - kFirstVector);
}

Engine::Slot Engine::new_slot(std::string name) {
  if (slot_count_ == slot_capacity_)
    throw SetupError("scalar slot capacity exhausted");
  slot_names_.push_back(std::move(name));
  return static_cast<Slot>(slot_count_++);
}

void Engine::put(Slot s, double v) {
  slot_values_[s] = v;
  slot_written_[s].store(true, std::memory_order_release);
}

double Engine::get(Slot s) const {
  assert(slot_written_[s].load(std::memory_order_acquire));
  return slot_values_[s];
}

double Engine::await(Slot s) {
  flush_pending_one(s);
  exec_->wait(
      [this, s] { return slot_written_[s].load(std::memory_order_acquire); });
  return slot_values_[s];
}

void Engine::flush_pending_one(Slot s) {
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    for (Slot r : pending_[i].results) {
      if (r != s) continue;
      TaskNode node = std::move(pending_[i].node);
      pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(i));
      exec_->submit(std::move(node));
      return;
    }
  }
}

void Engine::flush_pending(const std::vector<Slot>& slots) {
  for (Slot s : slots) flush_pending_one(s);
}

Engine::Coef Engine::constant(double v) const {
  return {[v] { return v; }, {}};
}

Engine::Coef Engine::value(Slot s) const {
  return {[this, s] { return slot_values_[s]; }, {s}};
}

Engine::Coef Engine::ratio(Slot num, Slot den) const {
  return {[this, num, den] { return slot_values_[num] / slot_values_[den]; },
          {num, den}};
}

AccessCounter* Engine::counter_for(int iter) {
  if (!count_accesses_ || iter < 0) return nullptr;
  std::lock_guard lk(counter_mu_);
  while (static_cast<int>(counters_.size()) <= iter) counters_.emplace_back();
  return &counters_[iter];
}

std::vector<AccessCounts> Engine::iteration_access_counts() const {
  std::lock_guard lk(counter_mu_);
  std::vector<AccessCounts> out;
  out.reserve(counters_.size());
  for (const AccessCounter& c : counters_)
    out.push_back({c.elements_read.load(std::memory_order_relaxed),
                   c.elements_written.load(std::memory_order_relaxed)});
  return out;
}

BufferRegion Engine::slot_region(Slot s) const {
  return {kSlotBuffer, static_cast<std::int64_t>(s), 1};
}

BufferRegion Engine::partial_region(std::size_t offset,
                                    std::int64_t len) const {
  return {kPartialBuffer, static_cast<std::int64_t>(offset), len};
}

std::vector<BufferRegion> Engine::spmv_read_regions(BufferId x,
                                                    int block) const {
  std::vector<BufferRegion> out;
  out.reserve(tasks_->spmv_deps[block].size());
  for (const DepRegion& d : tasks_->spmv_deps[block])
    out.push_back({x, d.offset, d.length});
  return out;
}

void Engine::emit_blocks(const char* label, int iter, bool parallel_ok,
                         const std::function<TaskNode(int block)>& make) {
  std::vector<TaskNode> nodes;
  nodes.reserve(tasks_->blocks.size());
  for (int b = 0; b < static_cast<int>(tasks_->blocks.size()); ++b) {
    if (tasks_->blocks[b].size == 0) continue;
    TaskNode n = make(b);
    n.label = label;
    n.iteration = iter;
    nodes.push_back(std::move(n));
  }
  if (parallel_ok)
    exec_->batch(std::move(nodes));
  else
    exec_->serial(std::move(nodes));
}

void Engine::exchange(BufferId x, int iter) {
  if (slab_->neighbors.empty()) return;  // single rank: nothing to do
  const std::uint64_t op = next_op_++;
  const int parity = iter & 1;
  auto xs = values(x);

  for (const NeighborExchange& ex : slab_->neighbors) {
    TaskNode send;
    send.label = "halo_send";
    send.iteration = iter;
    send.auto_trace = false;
    send.reads = coalesce_rows(x, ex.send_rows);
    const int neighbor = ex.neighbor;
    const auto* rows = &ex.send_rows;
    send.body = [this, xs, rows, neighbor, parity, op, iter](TaskContext& c) {
      const std::int64_t t0 = tracer_->now();
      std::vector<double> payload;
      payload.reserve(rows->size());
      for (std::int64_t r : *rows) payload.push_back(xs[r]);
      fabric_->send(rank_, neighbor, parity, std::move(payload));
      c.tracer->log(c.worker, EventKind::P2pSend,
                    "ch" + std::to_string(rank_) + "->" +
                        std::to_string(neighbor) + "#p" +
                        std::to_string(parity),
                    iter, op, c.task, t0, tracer_->now());
    };
    exec_->submit(std::move(send));
  }

  for (const NeighborExchange& ex : slab_->neighbors) {
    const std::uint64_t ticket =
        fabric_->recv_ticket(rank_, ex.neighbor, parity);
    TaskNode recv;
    recv.label = "halo_recv";
    recv.iteration = iter;
    recv.auto_trace = false;
    recv.writes = {{x, ex.recv_offset, ex.recv_count}};
    const int neighbor = ex.neighbor;
    const std::int64_t off = ex.recv_offset;
    const std::int64_t cnt = ex.recv_count;
    recv.gate = [this, neighbor, parity, ticket] {
      return fabric_->recv_ready(rank_, neighbor, parity, ticket);
    };
    recv.body = [this, xs, neighbor, parity, ticket, off, cnt, op,
                 iter](TaskContext& c) {
      const std::int64_t t0 = tracer_->now();
      std::vector<double> payload =
          fabric_->recv_take(rank_, neighbor, parity, ticket);
      if (static_cast<std::int64_t>(payload.size()) != cnt)
        throw ProtocolError("halo payload size mismatch");
      std::copy(payload.begin(), payload.end(), xs.begin() + off);
      c.tracer->log(c.worker, EventKind::P2pRecv,
                    "ch" + std::to_string(neighbor) + "->" +
                        std::to_string(rank_) + "#p" + std::to_string(parity),
                    iter, op, c.task, t0, tracer_->now());
    };
    exec_->submit(std::move(recv));
  }
}

void Engine::spmv(BufferId x, BufferId y, int iter) {
  auto xs = values(x);
  auto ys = values(y);
  const CsrMatrix* m = &system_->matrix;
  emit_blocks("spmv", iter, true, [&](int b) {
    TaskNode n;
    n.reads = spmv_read_regions(x, b);
    const Block blk = tasks_->blocks[b];
    n.writes = {{y, blk.start, blk.size}};
    n.body = [m, xs, ys, blk](TaskContext& c) {
      hlamkit::spmv(*m, xs, ys, {blk.start, blk.start + blk.size}, c.counter);
    };
    return n;
  });
}

void Engine::axpby(Coef a, BufferId x, Coef b, BufferId y, BufferId w,
                   int iter) {
  flush_pending(a.deps);
  flush_pending(b.deps);
  auto xs = values(x);
  auto ys = values(y);
  auto ws = values(w);
  emit_blocks("axpby", iter, true, [&](int blk_i) {
    TaskNode n;
    const Block blk = tasks_->blocks[blk_i];
    n.reads = {{x, blk.start, blk.size}, {y, blk.start, blk.size}};
    for (Slot s : a.deps) n.reads.push_back(slot_region(s));
    for (Slot s : b.deps) n.reads.push_back(slot_region(s));
    n.writes = {{w, blk.start, blk.size}};
    auto af = a.fn;
    auto bf = b.fn;
    n.body = [af, bf, xs, ys, ws, blk](TaskContext& c) {
      hlamkit::axpby(af(), xs, bf(), ys, ws, {blk.start, blk.start + blk.size},
                     c.counter);
    };
    return n;
  });
}

void Engine::triad(Coef a, BufferId x, Coef b, BufferId y, Coef cz, BufferId z,
                   int iter) {
  flush_pending(a.deps);
  flush_pending(b.deps);
  flush_pending(cz.deps);
  auto xs = values(x);
  auto ys = values(y);
  auto zs = values(z);
  emit_blocks("triad", iter, true, [&](int blk_i) {
    TaskNode n;
    const Block blk = tasks_->blocks[blk_i];
    n.reads = {{x, blk.start, blk.size},
               {y, blk.start, blk.size},
               {z, blk.start, blk.size}};
    for (Slot s : a.deps) n.reads.push_back(slot_region(s));
    for (Slot s : b.deps) n.reads.push_back(slot_region(s));
    for (Slot s : cz.deps) n.reads.push_back(slot_region(s));
    n.writes = {{z, blk.start, blk.size}};
    auto af = a.fn;
    auto bf = b.fn;
    auto cf = cz.fn;
    n.body = [af, bf, cf, xs, ys, zs, blk](TaskContext& c) {
      hlamkit::triad(af(), xs, bf(), ys, cf(), zs,
                     {blk.start, blk.start + blk.size}, c.counter);
    };
    return n;
  });
}

std::vector<Engine::Slot> Engine::fused_dots(const std::vector<DotSpec>& specs,
                                             const char* label, int iter) {
  const std::size_t nspec = specs.size();
  const std::size_t nblk = tasks_->blocks.size();
  if (partials_next_ + nspec * nblk > partials_.size()) partials_next_ = 0;
  const std::size_t base = partials_next_;
  partials_next_ += nspec * nblk;

  emit_blocks(label, iter, true, [&](int b) {
    TaskNode n;
    const Block blk = tasks_->blocks[b];
    for (const DotSpec& d : specs) {
      n.reads.push_back({d.x, blk.start, blk.size});
      n.reads.push_back({d.y, blk.start, blk.size});
    }
    std::vector<std::pair<std::span<const double>, std::span<const double>>>
        ops;
    ops.reserve(nspec);
    for (const DotSpec& d : specs) ops.emplace_back(values(d.x), values(d.y));
    n.writes.reserve(nspec);
    double* out = partials_.data() + base;
    for (std::size_t s = 0; s < nspec; ++s)
      n.writes.push_back(
          partial_region(base + s * nblk + static_cast<std::size_t>(b), 1));
    n.body = [ops, out, nblk, b, blk](TaskContext& c) {
      for (std::size_t s = 0; s < ops.size(); ++s)
        out[s * nblk + static_cast<std::size_t>(b)] =
            dot_block(ops[s].first, ops[s].second,
                      {blk.start, blk.start + blk.size}, c.counter);
    };
    return n;
  });

  // Combine per-block partials in ascending block order: bit-identical
  // scalars on every backend and run.
  std::vector<Slot> out_slots;
  out_slots.reserve(nspec);
  for (std::size_t s = 0; s < nspec; ++s)
    out_slots.push_back(new_slot(std::string(label) + "_local"));
  TaskNode combine;
  combine.label = std::string(label) + "_combine";
  combine.iteration = iter;
  combine.reads.reserve(nspec);
  for (std::size_t s = 0; s < nspec; ++s)
    combine.reads.push_back(
        partial_region(base + s * nblk, static_cast<std::int64_t>(nblk)));
  for (Slot s : out_slots) combine.writes.push_back(slot_region(s));
  const double* in = partials_.data() + base;
  std::vector<std::size_t> live_blocks;
  for (std::size_t b = 0; b < nblk; ++b)
    if (tasks_->blocks[b].size > 0) live_blocks.push_back(b);
  combine.body = [this, in, nblk, live_blocks, out_slots,
                  nspec](TaskContext&) {
    for (std::size_t s = 0; s < nspec; ++s) {
      double sum = 0.0;
      for (std::size_t b : live_blocks) sum += in[s * nblk + b];
      put(out_slots[s], sum);
    }
  };
  exec_->submit(std::move(combine));
  return out_slots;
}

Engine::Slot Engine::dot(BufferId x, BufferId y, int iter) {
  return fused_dots({{x, y}}, "dot", iter)[0];
}

std::array<Engine::Slot, 2> Engine::dot2(BufferId x1, BufferId y1, BufferId x2,
                                         BufferId y2, int iter) {
  auto s = fused_dots({{x1, y1}, {x2, y2}}, "dot2", iter);
  return {s[0], s[1]};
}

std::array<Engine::Slot, 3> Engine::dot3(BufferId x1, BufferId y1, BufferId x2,
                                         BufferId y2, BufferId x3, BufferId y3,
                                         int iter) {
  auto s = fused_dots({{x1, y1}, {x2, y2}, {x3, y3}}, "dot3", iter);
  return {s[0], s[1], s[2]};
}

Engine::Slot Engine::residual(BufferId x, BufferId r, int iter) {
  const std::size_t nblk = tasks_->blocks.size();
  if (partials_next_ + nblk > partials_.size()) partials_next_ = 0;
  const std::size_t base = partials_next_;
  partials_next_ += nblk;

  auto xs = values(x);
  auto rs = values(r);
  const CsrMatrix* m = &system_->matrix;
  std::span<const double> bs(system_->rhs);
  double* out = partials_.data() + base;
  emit_blocks("residual", iter, true, [&](int b) {
    TaskNode n;
    const Block blk = tasks_->blocks[b];
    n.reads = spmv_read_regions(x, b);
    n.writes = {{r, blk.start, blk.size},
                partial_region(base + static_cast<std::size_t>(b), 1)};
    n.body = [m, xs, bs, rs, out, b, blk](TaskContext& c) {
      out[b] = residual_fused(*m, xs, bs, rs, {blk.start, blk.start + blk.size},
                              c.counter);
    };
    return n;
  });

  Slot slot = new_slot("residual_local");
  TaskNode combine;
  combine.label = "residual_combine";
  combine.iteration = iter;
  combine.reads = {partial_region(base, static_cast<std::int64_t>(nblk))};
  combine.writes = {slot_region(slot)};
  std::vector<std::size_t> live_blocks;
  for (std::size_t b = 0; b < nblk; ++b)
    if (tasks_->blocks[b].size > 0) live_blocks.push_back(b);
  combine.body = [this, out, live_blocks, slot](TaskContext&) {
    double sum = 0.0;
    for (std::size_t b : live_blocks) sum += out[b];
    put(slot, sum);
  };
  exec_->submit(std::move(combine));
  return slot;
}

Engine::Slot Engine::jacobi_step(BufferId x, BufferId y, int iter) {
  const std::size_t nblk = tasks_->blocks.size();
  if (partials_next_ + nblk > partials_.size()) partials_next_ = 0;
  const std::size_t base = partials_next_;
  partials_next_ += nblk;

  auto xs = values(x);
  auto ys = values(y);
  const CsrMatrix* m = &system_->matrix;
  std::span<const double> bs(system_->rhs);
  double* out = partials_.data() + base;
  emit_blocks("jacobi", iter, true, [&](int b) {
    TaskNode n;
    const Block blk = tasks_->blocks[b];
    n.reads = spmv_read_regions(x, b);
    n.writes = {{y, blk.start, blk.size},
                partial_region(base + static_cast<std::size_t>(b), 1)};
    n.body = [m, xs, bs, ys, out, b, blk](TaskContext& c) {
      out[b] = jacobi_sweep(*m, xs, bs, ys, {blk.start, blk.start + blk.size},
                            c.counter);
    };
    return n;
  });

  Slot slot = new_slot("jacobi_res_local");
  TaskNode combine;
  combine.label = "jacobi_combine";
  combine.iteration = iter;
  combine.reads = {partial_region(base, static_cast<std::int64_t>(nblk))};
  combine.writes = {slot_region(slot)};
  std::vector<std::size_t> live_blocks;
  for (std::size_t b = 0; b < nblk; ++b)
    if (tasks_->blocks[b].size > 0) live_blocks.push_back(b);
  combine.body = [this, out, live_blocks, slot](TaskContext&) {
    double sum = 0.0;
    for (std::size_t b : live_blocks) sum += out[b];
    put(slot, sum);
  };
  exec_->submit(std::move(combine));
  return slot;
}

void Engine::gs_sweep(bool forward, SweepOrder order, const ColorPlan* colors,
                      BufferId x, int iter) {
  auto xs = values(x);
  const CsrMatrix* m = &system_->matrix;
  std::span<const double> bs(system_->rhs);
  const std::int64_t whole = system_->local_nrows + system_->halo_size;

  auto make_node = [&](int b, bool relaxed) {
    TaskNode n;
    n.label = forward ? "gs_fwd" : "gs_bwd";
    n.iteration = iter;
    const Block blk = tasks_->blocks[b];
    if (relaxed) {
      n.relaxed_writes = true;
      n.writes = {{x, 0, whole}};
    } else {
      n.reads = spmv_read_regions(x, b);
      n.writes = {{x, blk.start, blk.size}};
    }
    n.body = [m, xs, bs, blk, forward, relaxed](TaskContext& c) {
      const Range rg{blk.start, blk.start + blk.size};
      if (relaxed) {
        if (forward)
          gs_forward_relaxed(*m, xs, bs, rg, c.counter);
        else
          gs_backward_relaxed(*m, xs, bs, rg, c.counter);
      } else {
        if (forward)
          gs_forward(*m, xs, bs, rg, c.counter);
        else
          gs_backward(*m, xs, bs, rg, c.counter);
      }
    };
    return n;
  };

  const int nblk = static_cast<int>(tasks_->blocks.size());
  std::vector<int> blocks_in_order;
  if (order == SweepOrder::Colored) {
    assert(colors);
    const int nc = colors->color_count;
    if (forward) {
      for (int c = 0; c < nc; ++c)
        for (int b = 0; b < nblk; ++b)
          if (colors->task_color[b] == c) blocks_in_order.push_back(b);
    } else {
      for (int c = nc - 1; c >= 0; --c)
        for (int b = nblk - 1; b >= 0; --b)
          if (colors->task_color[b] == c) blocks_in_order.push_back(b);
    }
  } else {
    for (int b = 0; b < nblk; ++b)
      blocks_in_order.push_back(forward ? b : nblk - 1 - b);
  }

  if (order == SweepOrder::Relaxed) {
    if (backend_ == Backend::TaskGraph) {
      // Explicit fwd(s) -> bwd(s) edge per subdomain: relaxed whole-x writes
      // establish no mutual order.
      for (int b : blocks_in_order) {
        if (tasks_->blocks[b].size == 0) continue;
        TaskNode n = make_node(b, true);
        if (!forward) n.after = {relaxed_forward_ids_[b]};
        const std::uint64_t id = exec_->submit(std::move(n));
        if (forward) relaxed_forward_ids_[b] = id;
      }
    } else {
      std::vector<TaskNode> nodes;
      for (int b : blocks_in_order)
        if (tasks_->blocks[b].size > 0) nodes.push_back(make_node(b, true));
      exec_->batch(std::move(nodes));  // fork-join races; sequential is exact
    }
    return;
  }

  std::vector<TaskNode> nodes;
  for (int b : blocks_in_order)
    if (tasks_->blocks[b].size > 0) nodes.push_back(make_node(b, false));
  exec_->serial(std::move(nodes));
}

void Engine::snapshot(BufferId x, std::vector<double>* out, int iter) {
  auto xs = values(x);
  const std::int64_t n = system_->local_nrows;
  TaskNode node;
  node.label = "snapshot";
  node.iteration = iter;
  node.reads = {{x, 0, n}};
  node.body = [xs, n, out](TaskContext&) {
    out->assign(xs.begin(), xs.begin() + n);
  };
  exec_->submit(std::move(node));
}

std::vector<Engine::Slot> Engine::allreduce(std::vector<Slot> locals,
                                            CollectiveMode mode, int iter) {
  flush_pending(locals);
  const std::uint64_t op = next_op_++;
  std::vector<Slot> results;
  results.reserve(locals.size());
  for (std::size_t i = 0; i < locals.size(); ++i)
    results.push_back(new_slot("allreduce#" + std::to_string(op)));
  const std::string label = "allreduce#" + std::to_string(op);

  if (backend_ != Backend::TaskGraph) mode = CollectiveMode::Blocking;

  if (mode == CollectiveMode::Blocking) {
    TaskNode node;
    node.label = label;
    node.iteration = iter;
    node.auto_trace = false;
    for (Slot s : locals) node.reads.push_back(slot_region(s));
    for (Slot s : results) node.writes.push_back(slot_region(s));
    node.body = [this, locals, results, op, iter, label](TaskContext& c) {
      std::vector<double> vals;
      vals.reserve(locals.size());
      for (Slot s : locals) vals.push_back(slot_values_[s]);
      const std::int64_t t0 = tracer_->now();
      c.tracer->log(c.worker, EventKind::CollectiveBegin, label, iter, op,
                    c.task, t0, t0);
      std::vector<double> res = fabric_->allreduce_blocking(rank_, op, vals);
      const std::int64_t t1 = tracer_->now();
      c.tracer->log(c.worker, EventKind::BlockingWait, label, iter, op, c.task,
                    t0, t1);
      c.tracer->log(c.worker, EventKind::CollectiveEnd, label, iter, op,
                    c.task, t1, t1);
      for (std::size_t i = 0; i < results.size(); ++i) put(results[i], res[i]);
    };
    exec_->submit(std::move(node));
    return results;
  }

  TaskNode post;
  post.label = label;
  post.iteration = iter;
  post.auto_trace = false;
  for (Slot s : locals) post.reads.push_back(slot_region(s));
  post.body = [this, locals, op, iter, label](TaskContext& c) {
    std::vector<double> vals;
    vals.reserve(locals.size());
    for (Slot s : locals) vals.push_back(slot_values_[s]);
    const std::int64_t t0 = tracer_->now();
    c.tracer->log(c.worker, EventKind::CollectiveBegin, label, iter, op,
                  c.task, t0, t0);
    tracer_->set_window_begin(op, t0);
    fabric_->allreduce_post(rank_, op, vals);
  };
  const std::uint64_t post_id = exec_->submit(std::move(post));
  tracer_->note_overlapped_window(op, iter, label, post_id);

  TaskNode completion;
  completion.label = label;
  completion.iteration = iter;
  completion.auto_trace = false;
  completion.background = true;
  for (Slot s : results) completion.writes.push_back(slot_region(s));
  completion.gate = [this, op] { return fabric_->collective_done(op); };
  completion.body = [this, results, op, iter, label](TaskContext& c) {
    std::vector<double> res = fabric_->collective_result(op);
    const std::int64_t t = tracer_->now();
    c.tracer->log(c.worker, EventKind::CollectiveEnd, label, iter, op, c.task,
                  t, t);
    tracer_->close_overlapped_window(op, t);
    for (std::size_t i = 0; i < results.size(); ++i) put(results[i], res[i]);
  };
  pending_.push_back({results, std::move(completion)});
  return results;
}

void Engine::drain() {
  while (!pending_.empty()) {
    TaskNode node = std::move(pending_.back().node);
    pending_.pop_back();
    exec_->submit(std::move(node));
  }
  exec_->drain();
}

TraceLog Engine::take_trace() { return tracer_->finalize(); }

}  // namespace hlamkit
