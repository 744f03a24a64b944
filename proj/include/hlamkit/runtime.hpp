#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hlamkit/fabric.hpp"
#include "hlamkit/kernels.hpp"
#include "hlamkit/trace.hpp"

namespace hlamkit {

enum class Backend { Sequential, ForkJoin, TaskGraph };

const char* backend_name(Backend b);

using BufferId = std::uint32_t;

struct BufferRegion {
  BufferId buffer = 0;
  std::int64_t offset = 0;
  std::int64_t length = 0;
};

class Tracer;

struct TaskContext {
  int rank = 0;
  int worker = 0;
  std::uint64_t task = 0;  // submission id of the running task
  Tracer* tracer = nullptr;
  AccessCounter* counter = nullptr;
};

// Unit of scheduling. Two tasks conflict iff one's writes overlap the
// other's reads or writes on the same buffer; conflicting tasks execute in
// submission order. Relaxed writes skip write-write conflicts against other
// relaxed writers (reads still order against them).
struct TaskNode {
  std::string label = "task";
  int iteration = 0;
  std::vector<BufferRegion> reads;
  std::vector<BufferRegion> writes;
  bool relaxed_writes = false;
  std::vector<std::uint64_t> after;  // explicit predecessors (task ids)
  std::function<bool()> gate;        // readiness of a communication handle
  std::function<void(TaskContext&)> body;
  bool auto_trace = true;  // wrap body in one Compute event
  // Background nodes (overlapped-collective completions) run only when no
  // regular node is ready, so independent compute fills the wait window.
  bool background = false;
};

// Per-rank event sink. Worker lanes are lock-free; finalize() merges lanes,
// sorts by start time and synthesizes blocking_wait events for overlapped
// collectives whose wait window contains no compute.
class Tracer {
 public:
  struct Clock {
    std::chrono::steady_clock::time_point t0;
    std::int64_t now_ns() const;
  };

  Tracer(int rank, std::shared_ptr<const Clock> clock, int lanes);

  int rank() const { return rank_; }
  std::int64_t now() const { return clock_->now_ns(); }

  void log(int worker, EventKind kind, std::string label, int iter,
           std::uint64_t op, std::uint64_t task, std::int64_t t0,
           std::int64_t t1);

  // Overlapped-collective bookkeeping. A window is covered when some compute
  // task submitted after the posting task starts before the completion runs
  // (or plainly intersects the window in time); otherwise finalize()
  // synthesizes a blocking_wait.
  void note_overlapped_window(std::uint64_t op, int iter, std::string label,
                              std::uint64_t post_task);
  void set_window_begin(std::uint64_t op, std::int64_t begin_ns);
  void close_overlapped_window(std::uint64_t op, std::int64_t end_ns);

  TraceLog finalize();

  static std::shared_ptr<const Clock> make_clock();

 private:
  struct Window {
    std::uint64_t op;
    int iter;
    std::string label;
    std::uint64_t post_task;
    std::int64_t begin_ns = -1;
    std::int64_t end_ns = -1;
  };

  int rank_;
  std::shared_ptr<const Clock> clock_;
  std::vector<std::vector<TraceEvent>> lanes_;
  std::mutex window_mu_;
  std::vector<Window> windows_;
};

// Execution backend for one rank. submit() runs tasks honoring declared
// dependencies; batch() is one group of independent block tasks (the
// fork-join backend runs it team-parallel with an implicit barrier, other
// backends fall back to submit order).
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::uint64_t submit(TaskNode node) = 0;
  virtual void batch(std::vector<TaskNode> nodes) = 0;
  // Serial section: tasks that must not run concurrently with each other
  // even on the fork-join backend (ordered sweeps).
  virtual void serial(std::vector<TaskNode> nodes);
  // Blocks the calling (solver) thread until pred() holds.
  virtual void wait(const std::function<bool()>& pred) = 0;
  virtual void drain() = 0;
  virtual int workers() const = 0;
};

using CounterProvider = std::function<AccessCounter*(int iteration)>;

std::unique_ptr<Executor> make_executor(Backend backend, int rank, int workers,
                                        Tracer& tracer, Fabric* fabric,
                                        CounterProvider counters = {});

// One-shot execution of a prebuilt graph on a fresh single-rank executor.
TraceLog run_graph(Backend backend, std::vector<TaskNode> nodes,
                   int workers = 1);

}  // namespace hlamkit
