#include "physhare/retarget/retargeting.hpp"

#include <cmath>
#include <limits>

#include "physhare/core/error.hpp"

namespace physhare::retarget {

std::string_view to_string(PredictionSource s) {
  return s == PredictionSource::snap_anchor ? "snap-anchor" : "release-event";
}

namespace {

Pose2D nearest_anchor(Vec2 p, std::span<const Anchor> anchors) {
  const Anchor* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& a : anchors) {
    const double d = distance(a.pose.position(), p);
    if (d < best_d) {
      best_d = d;
      best = &a;
    }
  }
  return best->pose;
}

}  // namespace

Pose2D predict_setdown(const VirtualObject& held_object, const TrackedFrame& /*hand*/,
                       std::span<const Anchor> anchors) {
  if (!held_object.held_by) {
    throw ContractViolation("predict_setdown needs a held object");
  }
  if (anchors.empty()) {
    return held_object.pose;
  }
  return nearest_anchor(held_object.pose.position(), anchors);
}

void SetdownPredictor::observe(const Pose2D& object_pose, Millis timestamp) {
  if (last_ && timestamp <= last_->second) {
    last_->first = object_pose;
    return;
  }
  previous_ = last_;
  last_ = std::pair{object_pose, timestamp};
}

void SetdownPredictor::reset() {
  last_.reset();
  previous_.reset();
}

std::optional<Vec2> SetdownPredictor::velocity() const {
  if (!last_ || !previous_) {
    return std::nullopt;
  }
  const double dt = static_cast<double>(last_->second - previous_->second) / 1000.0;
  return (last_->first.position() - previous_->first.position()) * (1.0 / dt);
}

std::optional<Pose2D> SetdownPredictor::predict(std::span<const Anchor> anchors) const {
  if (!last_) {
    return std::nullopt;
  }
  const Pose2D& here = last_->first;
  if (anchors.empty()) {
    return here;
  }
  const auto v = velocity();
  if (v && v->norm() >= options_.moving_speed) {
    const Vec2 dir = v->normalized();
    const Anchor* best = nullptr;
    double best_along = 0.0;
    for (const auto& a : anchors) {
      const Vec2 rel = a.pose.position() - here.position();
      const double along = rel.dot(dir);
      const double off = std::abs(rel.cross(dir));
      if (along > 1e-9 && off <= options_.ray_tolerance && (best == nullptr || along > best_along)) {
        best = &a;
        best_along = along;
      }
    }
    if (best != nullptr) {
      return best->pose;
    }
  }
  return nearest_anchor(here.position(), anchors);
}

Millis rolling_deadline(Millis now, Millis artificial_latency, double remaining_distance, double hand_speed) {
  const auto travel = static_cast<Millis>(std::ceil(remaining_distance / hand_speed * 1000.0 - 1e-9));
  return now + artificial_latency + std::max<Millis>(travel, 0);
}

Millis release_deadline(Millis release_time, Millis artificial_latency) { return release_time + artificial_latency; }

motion::PlanResult schedule_remote_catch_up(const RetargetTask& task, const RobotProxy& proxy,
                                            std::span<const motion::PathObstacle> others, const Workspace& workspace,
                                            Millis now, const motion::PlannerOptions& options) {
  if (task.proxy_id != proxy.id) {
    throw ContractViolation("retarget task is for proxy '" + task.proxy_id + "', not '" + proxy.id + "'");
  }
  return motion::plan_path(proxy, task.predicted_goal, others, workspace, now, task.deadline, options);
}

}  // namespace physhare::retarget
