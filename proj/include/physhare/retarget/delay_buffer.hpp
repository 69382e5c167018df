#pragma once

#include <deque>
#include <mutex>
#include <vector>

#include "physhare/core/types.hpp"

namespace physhare::retarget {

/// Default artificial latency for the remote view.
inline constexpr Millis kDefaultArtificialLatency = 1500;

enum class UpdateKind { motion, grasp, setdown };

/// One remote observation waiting to be shown to a local user.
struct DelayedUpdate {
  TrackedFrame frame;
  UpdateKind kind = UpdateKind::motion;
  /// Time the update reached this site.
  Millis received_at = 0;
  /// Identifies the set-down for illusion bookkeeping.
  std::uint64_t event_id = 0;
};

/// Holds remote updates back by a fixed artificial latency. Pushing is safe
/// from a network thread while the simulation drains.
class DelayBuffer {
 public:
  explicit DelayBuffer(Millis artificial_latency = kDefaultArtificialLatency);

  void push(DelayedUpdate update);
  /// Removes and returns, in receipt order, every update whose
  /// received_at + latency <= now.
  std::vector<DelayedUpdate> delayed_view(Millis now);

  Millis latency() const;
  void set_latency(Millis latency);
  std::size_t pending() const;

 private:
  mutable std::mutex mu_;
  Millis latency_;
  std::deque<DelayedUpdate> queue_;
};

}  // namespace physhare::retarget
