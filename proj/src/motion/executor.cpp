#include "physhare/motion/executor.hpp"

#include <cmath>

#include "physhare/core/error.hpp"

namespace physhare::motion {

namespace {
constexpr double kTimeSlop = 1e-9;
}

bool execute_tick(RobotProxy& proxy, PlanProgress& progress, Millis dt) {
  if (dt <= 0) {
    throw ContractViolation("execute_tick requires dt > 0");
  }
  if (progress.done()) {
    proxy.state = ProxyState::idle;
    return false;
  }
  const double omega = proxy.profile.max_angular_speed;
  const double speed = proxy.profile.max_linear_speed;
  double budget = static_cast<double>(dt) / 1000.0;
  proxy.state = ProxyState::repositioning;

  while (!progress.done() && budget > 0.0) {
    const Pose2D& target = progress.plan.waypoints[progress.next];

    const double turn = heading_delta(proxy.pose.heading(), target.heading());
    const double turn_time = std::abs(turn) / omega;
    if (turn_time > budget + kTimeSlop) {
      const double step = std::copysign(omega * budget, turn);
      proxy.pose = proxy.pose.with_heading(proxy.pose.heading() + step);
      budget = 0.0;
      break;
    }
    proxy.pose = proxy.pose.with_heading(target.heading());
    budget -= turn_time;

    const Vec2 to_go = target.position() - proxy.pose.position();
    const double dist = to_go.norm();
    const double drive_time = dist / speed;
    if (drive_time > budget + kTimeSlop) {
      const Vec2 step = to_go * (speed * std::max(budget, 0.0) / dist);
      proxy.pose = proxy.pose.with_position(proxy.pose.position() + step);
      budget = 0.0;
      break;
    }
    proxy.pose = target;
    budget -= drive_time;
    ++progress.next;
  }

  if (progress.done()) {
    proxy.state = ProxyState::idle;
    return true;
  }
  return false;
}

}  // namespace physhare::motion
