#include "hlamkit/fabric.hpp"

#include <algorithm>

namespace hlamkit {

namespace {

std::uint64_t channel_key(int dst, int src, int parity) {
  return (static_cast<std::uint64_t>(dst) << 34) |
         (static_cast<std::uint64_t>(src) << 4) |
         static_cast<std::uint64_t>(parity & 1);
}

}  // namespace

Fabric::Fabric(int ranks, std::chrono::nanoseconds timeout)
    : rank_count_(ranks),
      timeout_(timeout),
      t0_(std::chrono::steady_clock::now()),
      notifiers_(ranks) {}

std::int64_t Fabric::now_ns() const {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - t0_)
      .count();
}

void Fabric::set_notifier(int rank, std::function<void()> fn) {
  std::lock_guard lk(mu_);
  notifiers_.at(rank) = std::move(fn);
}

void Fabric::clear_notifier(int rank) {
  std::lock_guard lk(mu_);
  notifiers_.at(rank) = nullptr;
}

void Fabric::throw_if_poisoned_locked() const {
  if (poisoned_) throw FabricError("fabric poisoned: " + poison_why_);
}

void Fabric::notify_all_locked() {
  ++version_;
  cv_.notify_all();
  for (auto& fn : notifiers_)
    if (fn) fn();
}

Fabric::Collective& Fabric::instance_locked(std::uint64_t seq) {
  Collective& c = collectives_[seq];
  if (c.contrib.empty()) {
    c.contrib.resize(rank_count_);
    c.present.assign(rank_count_, false);
  }
  return c;
}

void Fabric::contribute_locked(std::unique_lock<std::mutex>& lk, int rank,
                               std::uint64_t seq,
                               std::span<const double> values,
                               CollectiveMode mode) {
  throw_if_poisoned_locked();
  Collective& c = instance_locked(seq);
  if (c.mode_set && c.mode != mode) {
    poisoned_ = true;
    poison_why_ = "collective mode mismatch";
    notify_all_locked();
    throw ProtocolError("collective mode mismatch across ranks");
  }
  if (c.present[rank]) {
    poisoned_ = true;
    poison_why_ = "duplicate collective contribution";
    notify_all_locked();
    throw ProtocolError("rank contributed twice to one collective");
  }
  if (c.count > 0) {
    for (int r = 0; r < rank_count_; ++r) {
      if (c.present[r] && c.contrib[r].size() != values.size()) {
        poisoned_ = true;
        poison_why_ = "collective value-count mismatch";
        notify_all_locked();
        throw ProtocolError("collective value-count mismatch across ranks");
      }
    }
  }
  c.mode = mode;
  c.mode_set = true;
  c.contrib[rank].assign(values.begin(), values.end());
  c.present[rank] = true;
  ++c.count;
  if (c.count == rank_count_) finish_locked(c);
  (void)lk;
}

void Fabric::finish_locked(Collective& c) {
  // Ascending rank-order fold keeps reductions bit-identical across runs.
  c.result.assign(c.contrib[0].size(), 0.0);
  for (int r = 0; r < rank_count_; ++r)
    for (std::size_t i = 0; i < c.result.size(); ++i)
      c.result[i] += c.contrib[r][i];
  c.done = true;
  notify_all_locked();
}

std::vector<double> Fabric::allreduce_blocking(int rank, std::uint64_t seq,
                                               std::span<const double> values) {
  std::unique_lock lk(mu_);
  contribute_locked(lk, rank, seq, values, CollectiveMode::Blocking);
  Collective& c = collectives_[seq];
  while (!c.done) {
    throw_if_poisoned_locked();
    if (cv_.wait_for(lk, timeout_) == std::cv_status::timeout) {
      poisoned_ = true;
      poison_why_ = "collective timeout (mismatched calls across ranks?)";
      notify_all_locked();
      throw ProtocolError(
          "collective wait timed out; ranks disagree on the collective "
          "sequence or mode");
    }
  }
  return c.result;
}

void Fabric::allreduce_post(int rank, std::uint64_t seq,
                            std::span<const double> values) {
  std::unique_lock lk(mu_);
  contribute_locked(lk, rank, seq, values, CollectiveMode::Overlapped);
}

bool Fabric::collective_done(std::uint64_t seq) const {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
  auto it = collectives_.find(seq);
  return it != collectives_.end() && it->second.done;
}

std::vector<double> Fabric::collective_result(std::uint64_t seq) const {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
  return collectives_.at(seq).result;
}

Fabric::Channel& Fabric::channel_locked(int dst, int src, int parity) {
  return channels_[channel_key(dst, src, parity)];
}

void Fabric::send(int src, int dst, int parity, std::vector<double> payload) {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
  if (dst < 0 || dst >= rank_count_)
    throw ProtocolError("send to unknown rank");
  Channel& ch = channel_locked(dst, src, parity);
  ch.messages.emplace(ch.arrivals++, std::move(payload));
  notify_all_locked();
}

std::uint64_t Fabric::recv_ticket(int dst, int src, int parity) {
  std::lock_guard lk(mu_);
  return channel_locked(dst, src, parity).tickets++;
}

bool Fabric::recv_ready(int dst, int src, int parity,
                        std::uint64_t ticket) const {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
  auto it = channels_.find(channel_key(dst, src, parity));
  return it != channels_.end() && it->second.arrivals > ticket;
}

std::vector<double> Fabric::recv_take(int dst, int src, int parity,
                                      std::uint64_t ticket) {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
  Channel& ch = channel_locked(dst, src, parity);
  auto it = ch.messages.find(ticket);
  if (it == ch.messages.end())
    throw ProtocolError("receive ticket has no matching message");
  std::vector<double> payload = std::move(it->second);
  ch.messages.erase(it);
  return payload;
}

void Fabric::wait_event(const std::function<bool()>& pred) {
  while (true) {
    std::uint64_t seen;
    {
      std::lock_guard lk(mu_);
      throw_if_poisoned_locked();
      seen = version_;
    }
    if (pred()) return;  // predicates may re-enter the fabric
    std::unique_lock lk(mu_);
    throw_if_poisoned_locked();
    if (version_ != seen) continue;  // progressed while checking
    if (cv_.wait_for(lk, timeout_) == std::cv_status::timeout) {
      poisoned_ = true;
      poison_why_ = "wait timeout (lost message or peer?)";
      notify_all_locked();
      throw ProtocolError("fabric wait timed out");
    }
  }
}

void Fabric::poison(const std::string& why) {
  std::lock_guard lk(mu_);
  if (poisoned_) return;
  poisoned_ = true;
  poison_why_ = why;
  notify_all_locked();
}

void Fabric::check() const {
  std::lock_guard lk(mu_);
  throw_if_poisoned_locked();
}

}  // namespace hlamkit
