#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "physhare/core/types.hpp"

namespace physhare::motion {

/// Space a proxy must keep clear of: its current position followed by the
/// waypoints it still intends to visit.
struct PathObstacle {
  ProxyId owner;
  std::vector<Vec2> polyline;
  double radius = 0.0;
};

/// Turn-in-place then straight-segment plan. Each waypoint carries the heading
/// the robot holds while driving into it; the robot may drive a segment in
/// reverse, so that heading is either the segment bearing or its opposite. A
/// trailing waypoint at an unchanged position is a pure final turn.
struct MotionPlan {
  ProxyId proxy_id;
  std::vector<Pose2D> waypoints;
  Millis start_time = 0;
  std::optional<Millis> deadline;
  /// Upper bound on the tick at which execution finishes.
  Millis estimated_arrival = 0;

  bool empty() const { return waypoints.empty(); }
  Pose2D goal_or(const Pose2D& fallback) const { return waypoints.empty() ? fallback : waypoints.back(); }
};

struct DeadlineInfeasible {
  /// Best-effort plan ignoring the deadline.
  MotionPlan plan;
  Millis deficit = 0;
};

struct Blocked {
  std::string reason;
};

using PlanResult = std::variant<MotionPlan, DeadlineInfeasible, Blocked>;

struct PlannerOptions {
  /// Simulation tick; estimates are rounded up to whole ticks.
  Millis tick = 10;
  /// Extra clearance on top of the summed footprint radii.
  double margin = 0.002;
  /// Required heading at the goal. When unset the robot stops with whatever
  /// heading it drove in with.
  std::optional<double> final_heading;
  /// Treat final_heading and final_heading + pi as equivalent.
  bool final_heading_symmetric = false;
};

/// Seconds needed to run `waypoints` from `start` under `profile`.
double travel_seconds(const Pose2D& start, std::span<const Pose2D> waypoints, const KinematicProfile& profile);

/// Plans `proxy` to `goal` around the remaining paths of `others`. Lower-id
/// proxies are expected to have planned first. Tries the straight segment,
/// then a single detour waypoint on either side of the first conflict, then
/// a coarse grid search.
PlanResult plan_path(const RobotProxy& proxy, const Pose2D& goal, std::span<const PathObstacle> others,
                     const Workspace& workspace, Millis start_time, std::optional<Millis> deadline,
                     const PlannerOptions& options = {});

/// Obstacle describing where `proxy` is and where `plan` (if any) still takes it.
PathObstacle obstacle_for(const RobotProxy& proxy, const MotionPlan* plan, std::size_t next_waypoint = 0);

nlohmann::json plan_to_json(const MotionPlan& plan);

}  // namespace physhare::motion
