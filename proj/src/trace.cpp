#include "hlamkit/trace.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace hlamkit {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Compute:
      return "compute";
    case EventKind::P2pSend:
      return "p2p_send";
    case EventKind::P2pRecv:
      return "p2p_recv";
    case EventKind::CollectiveBegin:
      return "collective_begin";
    case EventKind::CollectiveEnd:
      return "collective_end";
    case EventKind::BlockingWait:
      return "blocking_wait";
  }
  return "?";
}

BarrierCounts count_barriers(const TraceLog& trace, int iteration) {
  std::set<std::uint64_t> collectives;
  std::set<std::uint64_t> blocked;
  for (const TraceEvent& e : trace.events) {
    if (e.kind == EventKind::CollectiveBegin && e.iter == iteration)
      collectives.insert(e.op);
    if (e.kind == EventKind::BlockingWait) blocked.insert(e.op);
  }
  BarrierCounts out;
  for (std::uint64_t op : collectives) {
    if (blocked.count(op))
      ++out.blocking;
    else
      ++out.overlapped;
  }
  return out;
}

void write_jsonl(const TraceLog& trace, std::ostream& os) {
  for (const TraceEvent& e : trace.events) {
    os << "{\"rank\":" << e.rank << ",\"worker\":" << e.worker << ",\"kind\":\""
       << event_kind_name(e.kind) << "\",\"label\":\"" << e.label
       << "\",\"iter\":" << e.iter << ",\"op\":" << e.op << ",\"task\":"
       << e.task << ",\"t_start_ns\":" << e.t_start_ns
       << ",\"t_end_ns\":" << e.t_end_ns << "}\n";
  }
}

}  // namespace hlamkit
