#include "physhare/retarget/delay_buffer.hpp"

#include <algorithm>

#include "physhare/core/error.hpp"

namespace physhare::retarget {

DelayBuffer::DelayBuffer(Millis artificial_latency) : latency_(artificial_latency) {
  if (artificial_latency < 0) {
    throw ContractViolation("artificial latency must be non-negative");
  }
}

void DelayBuffer::push(DelayedUpdate update) {
  std::lock_guard lock(mu_);
  // Receipt order normally matches arrival order; keep it stable otherwise.
  auto pos = std::upper_bound(queue_.begin(), queue_.end(), update.received_at,
                              [](Millis t, const DelayedUpdate& u) { return t < u.received_at; });
  queue_.insert(pos, std::move(update));
}

std::vector<DelayedUpdate> DelayBuffer::delayed_view(Millis now) {
  std::lock_guard lock(mu_);
  std::vector<DelayedUpdate> due;
  while (!queue_.empty() && queue_.front().received_at + latency_ <= now) {
    due.push_back(std::move(queue_.front()));
    queue_.pop_front();
  }
  return due;
}

Millis DelayBuffer::latency() const {
  std::lock_guard lock(mu_);
  return latency_;
}

void DelayBuffer::set_latency(Millis latency) {
  if (latency < 0) {
    throw ContractViolation("artificial latency must be non-negative");
  }
  std::lock_guard lock(mu_);
  latency_ = latency;
}

std::size_t DelayBuffer::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

}  // namespace physhare::retarget
