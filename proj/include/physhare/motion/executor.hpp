#pragma once

#include <cstddef>

#include "physhare/motion/planner.hpp"

namespace physhare::motion {

/// A plan plus how far along it the robot is.
struct PlanProgress {
  MotionPlan plan;
  std::size_t next = 0;

  bool done() const { return next >= plan.waypoints.size(); }
};

/// Integrates one tick of `dt` milliseconds: rotate in place toward the next
/// waypoint's heading, then drive straight to it, spending the tick's time
/// budget across as many waypoints as it covers. Linear and angular travel in
/// the tick never exceed the profile limits times dt. Returns true when the
/// final waypoint was reached during this tick; the pose is then exactly the
/// plan's goal and the state is idle (callers promote it to engaged).
bool execute_tick(RobotProxy& proxy, PlanProgress& progress, Millis dt);

}  // namespace physhare::motion
