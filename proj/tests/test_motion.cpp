#include <gtest/gtest.h>

#include <random>

#include "physhare/motion/executor.hpp"
#include "physhare/motion/geometry.hpp"
#include "physhare/motion/planner.hpp"

using namespace physhare;
using namespace physhare::motion;

namespace {

RobotProxy robot(const std::string& id, Pose2D pose) {
  return {id, "a", KinematicProfile::tabletop(), pose, ProxyState::idle, std::nullopt};
}

// Runs a plan to completion and checks the per-tick limits on the way.
void run_checked(RobotProxy& r, MotionPlan plan, int max_ticks = 100000) {
  PlanProgress progress{std::move(plan), 0};
  const double lin = r.profile.max_linear_speed * 0.01 + 1e-9;
  const double ang = r.profile.max_angular_speed * 0.01 + 1e-9;
  for (int i = 0; i < max_ticks; ++i) {
    const Pose2D before = r.pose;
    const bool done = execute_tick(r, progress, 10);
    ASSERT_LE(distance(before, r.pose), lin);
    ASSERT_LE(std::abs(heading_delta(before.heading(), r.pose.heading())), ang);
    if (done) return;
  }
  FAIL() << "plan did not finish";
}

}  // namespace

TEST(Geometry, SegmentDistances) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0.5, 1.0}, {0, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({2.0, 0.0}, {0, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(segment_segment_distance({0, 0}, {1, 1}, {0, 1}, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(segment_segment_distance({0, 0}, {1, 0}, {0, 0.5}, {1, 0.5}), 0.5);
  const std::vector<Vec2> line = {{0, 0}, {3, 4}, {3, 5}};
  EXPECT_DOUBLE_EQ(polyline_length(line), 6.0);
}

TEST(Planner, StraightLineEstimateMatchesProfile) {
  const auto r = robot("p", Pose2D(0.15, 0.15, 0.0));
  const auto res = plan_path(r, Pose2D(0.75, 0.15), {}, Workspace::default_tabletop(), 1000, std::nullopt);
  const auto& plan = std::get<MotionPlan>(res);
  ASSERT_EQ(plan.waypoints.size(), 1u);
  // 0.6 m at 0.25 m/s, no turn.
  EXPECT_EQ(plan.estimated_arrival, 1000 + 2400);
}

TEST(Planner, DrivesBackwardsRatherThanTurningAround) {
  const auto r = robot("p", Pose2D(0.75, 0.15, 0.0));
  const auto plan = std::get<MotionPlan>(plan_path(r, Pose2D(0.15, 0.15), {}, Workspace::default_tabletop(), 0, std::nullopt));
  EXPECT_NEAR(std::abs(heading_delta(plan.waypoints.back().heading(), 0.0)), 0.0, 1e-9);
  EXPECT_EQ(plan.estimated_arrival, 2400);
}

TEST(Planner, DetoursAroundAParkedRobot) {
  const auto r = robot("p", Pose2D(0.10, 0.45, 0.0));
  const auto other = robot("q", Pose2D(0.45, 0.45, 0.0));
  const std::vector<PathObstacle> obstacles = {obstacle_for(other, nullptr)};
  const auto plan =
      std::get<MotionPlan>(plan_path(r, Pose2D(0.80, 0.45), obstacles, Workspace::bare_tabletop(), 0, std::nullopt));
  ASSERT_GE(plan.waypoints.size(), 2u);
  Vec2 prev = r.pose.position();
  for (const auto& w : plan.waypoints) {
    EXPECT_GE(point_segment_distance(other.pose.position(), prev, w.position()), 0.1 - 1e-9);
    prev = w.position();
  }
  EXPECT_LT(distance(plan.waypoints.back().position(), Vec2{0.80, 0.45}), 1e-12);
}

TEST(Planner, GoalInsideAnotherFootprintIsBlocked) {
  const auto r = robot("p", Pose2D(0.10, 0.10));
  const auto other = robot("q", Pose2D(0.45, 0.45));
  const std::vector<PathObstacle> obstacles = {obstacle_for(other, nullptr)};
  const auto res = plan_path(r, Pose2D(0.47, 0.45), obstacles, Workspace::bare_tabletop(), 0, std::nullopt);
  EXPECT_TRUE(std::holds_alternative<Blocked>(res));
}

TEST(Planner, MissedDeadlineReturnsBestEffortPlanAndDeficit) {
  const auto r = robot("p", Pose2D(0.15, 0.15, 0.0));
  const auto res = plan_path(r, Pose2D(0.75, 0.15), {}, Workspace::default_tabletop(), 0, 2000);
  const auto* inf = std::get_if<DeadlineInfeasible>(&res);
  ASSERT_NE(inf, nullptr);
  EXPECT_EQ(inf->deficit, 400);
  EXPECT_FALSE(inf->plan.empty());
}

TEST(Planner, GoalOutsideWorkspaceIsAContractViolation) {
  const auto r = robot("p", Pose2D(0.15, 0.15));
  EXPECT_THROW(plan_path(r, Pose2D(1.5, 0.15), {}, Workspace::default_tabletop(), 0, std::nullopt), ContractViolation);
}

TEST(Planner, FinalHeadingIsHonoured) {
  const auto r = robot("p", Pose2D(0.15, 0.15, 0.0));
  PlannerOptions opts;
  opts.final_heading = kPi / 2;
  auto plan = std::get<MotionPlan>(plan_path(r, Pose2D(0.45, 0.15), {}, Workspace::bare_tabletop(), 0, std::nullopt, opts));
  auto moved = r;
  run_checked(moved, plan);
  EXPECT_NEAR(std::abs(heading_delta(moved.pose.heading(), kPi / 2)), 0.0, 1e-9);
}

TEST(Executor, RandomPlansRespectSpeedAndTurnLimits) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.05, 0.85);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const auto w = Workspace::bare_tabletop();
  for (int i = 0; i < 200; ++i) {
    auto r = robot("p", Pose2D(pos(rng), pos(rng), ang(rng)));
    const Pose2D goal(pos(rng), pos(rng));
    auto res = plan_path(r, goal, {}, w, 0, std::nullopt);
    const auto& plan = std::get<MotionPlan>(res);
    Millis ticks = 0;
    PlanProgress progress{plan, 0};
    const double lin = r.profile.max_linear_speed * 0.01 + 1e-9;
    bool done = plan.empty();
    while (!done) {
      const Pose2D before = r.pose;
      done = execute_tick(r, progress, 10);
      ++ticks;
      ASSERT_LE(distance(before, r.pose), lin);
      ASSERT_LE(std::abs(heading_delta(before.heading(), r.pose.heading())), r.profile.max_angular_speed * 0.01 + 1e-9);
    }
    EXPECT_NEAR(distance(r.pose, goal), 0.0, 1e-9);
    EXPECT_LE(ticks * 10, plan.estimated_arrival);
  }
}

TEST(Executor, NonPositiveDtIsAContractViolation) {
  auto r = robot("p", Pose2D(0.1, 0.1));
  PlanProgress progress;
  EXPECT_THROW(execute_tick(r, progress, 0), ContractViolation);
}
