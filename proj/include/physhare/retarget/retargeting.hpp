#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "physhare/core/types.hpp"
#include "physhare/motion/planner.hpp"

namespace physhare::retarget {

/// Hand speed assumed when estimating when a moving object will be put down.
inline constexpr double kAssumedHandSpeed = 0.3;
/// Minimum spacing between two replans of the same proxy.
inline constexpr Millis kReplanInterval = 100;

enum class PredictionSource { snap_anchor, release_event };

std::string_view to_string(PredictionSource s);

struct RetargetTask {
  ProxyId proxy_id;
  Pose2D predicted_goal;
  Millis deadline = 0;
  PredictionSource prediction_source = PredictionSource::snap_anchor;
  std::uint32_t revision = 0;
};

/// Anchor nearest the held object's current position; the object's own pose
/// when there are no anchors. Throws ContractViolation if the object is not held.
Pose2D predict_setdown(const VirtualObject& held_object, const TrackedFrame& hand, std::span<const Anchor> anchors);

/// Stateful set-down predictor for a live object stream. While the object is
/// moving it extrapolates along the motion: of the anchors lying ahead on the
/// motion ray (within `ray_tolerance` of it) it picks the farthest, so the
/// proxy heads down the true line of travel from the first frame. When the
/// object is still, or nothing lies on the ray, it falls back to
/// predict_setdown's nearest-anchor rule.
class SetdownPredictor {
 public:
  struct Options {
    double ray_tolerance = 0.05;
    /// Below this speed the object is treated as stationary.
    double moving_speed = 0.02;
  };

  SetdownPredictor() = default;
  explicit SetdownPredictor(Options options) : options_(options) {}

  void observe(const Pose2D& object_pose, Millis timestamp);
  void reset();
  /// Prediction from the latest observation.
  std::optional<Pose2D> predict(std::span<const Anchor> anchors) const;
  std::optional<Vec2> velocity() const;

 private:
  Options options_{};
  std::optional<std::pair<Pose2D, Millis>> last_;
  std::optional<std::pair<Pose2D, Millis>> previous_;
};

/// Deadline while the object is still in hand: now + latency + time for the
/// hand to cover `remaining_distance` at kAssumedHandSpeed.
Millis rolling_deadline(Millis now, Millis artificial_latency, double remaining_distance,
                        double hand_speed = kAssumedHandSpeed);
/// Deadline once the release has been observed.
Millis release_deadline(Millis release_time, Millis artificial_latency);

/// Plans the proxy onto the task's goal by the task's deadline. Replanning on
/// a revised prediction is the same call from the proxy's current pose.
motion::PlanResult schedule_remote_catch_up(const RetargetTask& task, const RobotProxy& proxy,
                                            std::span<const motion::PathObstacle> others, const Workspace& workspace,
                                            Millis now, const motion::PlannerOptions& options = {});

/// Rate limiter for replans of one proxy.
class ReplanGate {
 public:
  explicit ReplanGate(Millis interval = kReplanInterval) : interval_(interval) {}
  bool ready(Millis now) const { return !last_ || now - *last_ >= interval_; }
  void mark(Millis now) { last_ = now; }

 private:
  Millis interval_;
  std::optional<Millis> last_;
};

}  // namespace physhare::retarget
