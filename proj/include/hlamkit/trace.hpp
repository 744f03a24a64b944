#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hlamkit {

enum class EventKind {
  Compute,
  P2pSend,
  P2pRecv,
  CollectiveBegin,
  CollectiveEnd,
  BlockingWait,
};

const char* event_kind_name(EventKind k);

struct TraceEvent {
  int rank = 0;
  int worker = 0;
  EventKind kind = EventKind::Compute;
  std::string label;
  int iter = 0;
  std::uint64_t op = 0;    // collective / exchange id, 0 = none
  std::uint64_t task = 0;  // submission id of the emitting task
  std::int64_t t_start_ns = 0;
  std::int64_t t_end_ns = 0;
};

// Merged multi-rank event record; events are totally ordered per rank.
struct TraceLog {
  std::vector<TraceEvent> events;
};

struct BarrierCounts {
  int blocking = 0;
  int overlapped = 0;
};

// A collective counts as blocking in an iteration iff any rank logged a
// blocking_wait attributed to it.
BarrierCounts count_barriers(const TraceLog& trace, int iteration);

// One JSON object per line: {rank, worker, kind, label, iter, op,
// t_start_ns, t_end_ns}; schema documented in docs/trace-schema.md.
void write_jsonl(const TraceLog& trace, std::ostream& os);

}  // namespace hlamkit
