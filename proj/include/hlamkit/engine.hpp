#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlamkit/fabric.hpp"
#include "hlamkit/partition.hpp"
#include "hlamkit/runtime.hpp"

namespace hlamkit {

// Per-rank submission facade solvers are written against. Each call emits
// the block tasks of one kernel step; the backend decides how they run.
// Dot products buffer per-block partials and combine them in ascending block
// order, so every backend produces bit-identical scalars.
class Engine {
 public:
  using Slot = std::uint32_t;

  // Scalar coefficient evaluated inside task bodies; deps lists the slots
  // the closure reads so the scheduler can order the task after their
  // writers.
  struct Coef {
    std::function<double()> fn;
    std::vector<Slot> deps;
  };

  struct Setup {
    Backend backend = Backend::Sequential;
    int workers = 1;
    const LocalSystem* system = nullptr;
    const RankSlab* slab = nullptr;  // empty neighbor list for 1 rank
    const TaskPlan* tasks = nullptr;
    Fabric* fabric = nullptr;
    int rank = 0;
    bool count_accesses = false;
    std::size_t slot_capacity = 1 << 16;  // fixed; slots never reallocate
    std::shared_ptr<const Tracer::Clock> clock;  // shared across ranks
  };

  explicit Engine(const Setup& setup);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  int rank() const { return rank_; }
  int rank_count() const;
  Backend backend() const { return backend_; }
  const TaskPlan& tasks() const { return *tasks_; }
  std::int64_t local_nrows() const { return system_->local_nrows; }

  // --- buffers ----------------------------------------------------------
  BufferId new_vector(std::string name, bool with_halo = false);
  std::span<double> values(BufferId id);
  std::span<const double> values(BufferId id) const;

  // --- scalar slots -----------------------------------------------------
  Slot new_slot(std::string name);
  void put(Slot s, double v);  // solver-thread write before readers submit
  double get(Slot s) const;    // read a slot known to be written
  double await(Slot s);        // wait until written, then read

  Coef constant(double v) const;
  Coef value(Slot s) const;
  Coef ratio(Slot num, Slot den) const;

  // --- steps ------------------------------------------------------------
  // Halo exchange of x's tail slots; channel set selected by iter parity.
  void exchange(BufferId x, int iter);
  void spmv(BufferId x, BufferId y, int iter);
  void axpby(Coef a, BufferId x, Coef b, BufferId y, BufferId w, int iter);
  void triad(Coef a, BufferId x, Coef b, BufferId y, Coef c, BufferId z,
             int iter);
  Slot dot(BufferId x, BufferId y, int iter);
  std::array<Slot, 2> dot2(BufferId x1, BufferId y1, BufferId x2, BufferId y2,
                           int iter);
  std::array<Slot, 3> dot3(BufferId x1, BufferId y1, BufferId x2, BufferId y2,
                           BufferId x3, BufferId y3, int iter);
  // r = b - A x; returns local sum of squares.
  Slot residual(BufferId x, BufferId r, int iter);
  // y = D^{-1} (b - (A - D) x); returns local sum of squared residuals.
  Slot jacobi_step(BufferId x, BufferId y, int iter);

  enum class SweepOrder { Chained, Colored, Relaxed };
  void gs_sweep(bool forward, SweepOrder order, const ColorPlan* colors,
                BufferId x, int iter);

  void snapshot(BufferId x, std::vector<double>* out, int iter);

  // Sum-allreduce of local slots; result slots are written when the
  // collective completes. Sequential and fork-join backends always run
  // Blocking (synchronous collectives); Overlapped requests take effect on
  // the task-graph backend only.
  std::vector<Slot> allreduce(std::vector<Slot> locals, CollectiveMode mode,
                              int iter);

  void drain();
  TraceLog take_trace();
  std::vector<AccessCounts> iteration_access_counts() const;

 private:
  struct DotSpec {
    BufferId x, y;
  };
  std::vector<Slot> fused_dots(const std::vector<DotSpec>& specs,
                               const char* label, int iter);
  void emit_blocks(const char* label, int iter, bool parallel_ok,
                   const std::function<TaskNode(int block)>& make);
  AccessCounter* counter_for(int iter);
  std::vector<BufferRegion> spmv_read_regions(BufferId x, int block) const;
  BufferRegion slot_region(Slot s) const;
  BufferRegion partial_region(std::size_t offset, std::int64_t len) const;

  Backend backend_;
  int rank_;
  const LocalSystem* system_;
  const RankSlab* slab_;
  const TaskPlan* tasks_;
  Fabric* fabric_;
  bool count_accesses_;

  std::shared_ptr<const Tracer::Clock> clock_;
  std::unique_ptr<Tracer> tracer_;
  std::unique_ptr<Executor> exec_;

  std::deque<std::vector<double>> vectors_;
  std::vector<std::string> vector_names_;

  std::vector<double> slot_values_;             // preallocated, stable
  std::unique_ptr<std::atomic<bool>[]> slot_written_;
  std::size_t slot_capacity_;
  std::size_t slot_count_ = 0;
  std::vector<std::string> slot_names_;

  std::vector<double> partials_;  // fixed-size ring of per-block partials
  std::size_t partials_next_ = 0;

  mutable std::mutex counter_mu_;
  std::deque<AccessCounter> counters_;  // per iteration

  std::uint64_t next_op_ = 1;  // collective sequence / exchange id
  std::vector<std::uint64_t> relaxed_forward_ids_;

  // Overlapped-collective completions are submitted lazily at the consume
  // point (first reader of a result slot, or an await), mirroring a
  // wait-conversion task placed where the program needs the dependency.
  struct PendingCompletion {
    std::vector<Slot> results;
    TaskNode node;
  };
  std::vector<PendingCompletion> pending_;
  void flush_pending(const std::vector<Slot>& slots);
  void flush_pending_one(Slot s);
};

}  // namespace hlamkit
