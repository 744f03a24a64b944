#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "hlamkit/errors.hpp"

namespace hlamkit {

enum class CollectiveMode { Blocking, Overlapped };

// In-process message fabric between simulated ranks: point-to-point channels
// (two independent sets selected by iteration parity) and sum-allreduce
// collectives matched by per-rank call sequence. All inter-rank data flows
// through here; ranks share no other mutable state.
//
// Reductions combine rank contributions in ascending rank order, so repeated
// runs produce bit-identical scalars. A watchdog turns stuck waits into
// ProtocolError after `timeout`; a failed rank poisons the fabric so peers
// abort instead of hanging.
class Fabric {
 public:
  explicit Fabric(int ranks, std::chrono::nanoseconds timeout =
                                 std::chrono::seconds(30));

  int ranks() const { return rank_count_; }
  std::int64_t now_ns() const;

  // Executors register a wakeup callback invoked on any fabric progress
  // (message arrival, collective completion, poison).
  void set_notifier(int rank, std::function<void()> fn);
  void clear_notifier(int rank);

  // --- collectives ------------------------------------------------------
  // seq is the per-rank collective call index; all ranks must call the same
  // sequence with the same mode and value count or the protocol error /
  // watchdog fires.
  std::vector<double> allreduce_blocking(int rank, std::uint64_t seq,
                                         std::span<const double> values);
  void allreduce_post(int rank, std::uint64_t seq,
                      std::span<const double> values);
  bool collective_done(std::uint64_t seq) const;
  std::vector<double> collective_result(std::uint64_t seq) const;

  // --- point-to-point ---------------------------------------------------
  void send(int src, int dst, int parity, std::vector<double> payload);
  // Tickets claim the k-th message of a channel in issue order; issue them
  // on the receiver in program order, consume in any order.
  std::uint64_t recv_ticket(int dst, int src, int parity);
  bool recv_ready(int dst, int src, int parity, std::uint64_t ticket) const;
  std::vector<double> recv_take(int dst, int src, int parity,
                                std::uint64_t ticket);

  // Blocks the calling thread until pred() holds; wakes on fabric progress.
  void wait_event(const std::function<bool()>& pred);

  void poison(const std::string& why);
  void check() const;  // throws FabricError when poisoned

 private:
  struct Collective {
    std::vector<std::vector<double>> contrib;
    std::vector<bool> present;
    int count = 0;
    CollectiveMode mode = CollectiveMode::Blocking;
    bool mode_set = false;
    bool done = false;
    std::vector<double> result;
  };
  struct Channel {
    std::map<std::uint64_t, std::vector<double>> messages;  // by arrival idx
    std::uint64_t arrivals = 0;
    std::uint64_t tickets = 0;
  };

  Collective& instance_locked(std::uint64_t seq);
  Channel& channel_locked(int dst, int src, int parity);
  void contribute_locked(std::unique_lock<std::mutex>& lk, int rank,
                         std::uint64_t seq, std::span<const double> values,
                         CollectiveMode mode);
  void finish_locked(Collective& c);
  void notify_all_locked();
  void throw_if_poisoned_locked() const;

  int rank_count_;
  std::chrono::nanoseconds timeout_;
  std::chrono::steady_clock::time_point t0_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::uint64_t, Collective> collectives_;
  std::map<std::uint64_t, Channel> channels_;  // key: (dst, src, parity)
  std::vector<std::function<void()>> notifiers_;
  std::uint64_t version_ = 0;  // bumped on every state change
  bool poisoned_ = false;
  std::string poison_why_;
};

}  // namespace hlamkit
