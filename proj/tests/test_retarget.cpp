#include <gtest/gtest.h>

#include <thread>

#include "physhare/retarget/delay_buffer.hpp"
#include "physhare/retarget/retargeting.hpp"

using namespace physhare;
using namespace physhare::retarget;

namespace {

DelayedUpdate update(const std::string& id, double x, Millis at, UpdateKind kind = UpdateKind::motion) {
  return {TrackedFrame{id, Pose2D(x, 0.0), at}, kind, at, 0};
}

}  // namespace

TEST(DelayBuffer, ReleasesExactlyAtReceiptPlusLatency) {
  DelayBuffer buf(1500);
  buf.push(update("mug", 0.1, 1000));
  buf.push(update("mug", 0.2, 1010));
  EXPECT_TRUE(buf.delayed_view(2499).empty());
  auto first = buf.delayed_view(2500);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_DOUBLE_EQ(first[0].frame.pose.x(), 0.1);
  EXPECT_EQ(buf.pending(), 1u);
  EXPECT_EQ(buf.delayed_view(5000).size(), 1u);
  EXPECT_EQ(buf.pending(), 0u);
}

TEST(DelayBuffer, ZeroLatencyIsPassThroughAndNegativeIsRejected) {
  DelayBuffer buf(0);
  buf.push(update("mug", 0.3, 40, UpdateKind::setdown));
  EXPECT_EQ(buf.delayed_view(40).size(), 1u);
  EXPECT_THROW(DelayBuffer(-1), ContractViolation);
  EXPECT_THROW(buf.set_latency(-5), ContractViolation);
}

TEST(DelayBuffer, KeepsReceiptOrderUnderConcurrentPushes) {
  DelayBuffer buf(10);
  std::thread t1([&] {
    for (int i = 0; i < 1000; ++i) buf.push(update("a", i, i));
  });
  std::thread t2([&] {
    for (int i = 0; i < 1000; ++i) buf.push(update("b", i, i));
  });
  t1.join();
  t2.join();
  const auto out = buf.delayed_view(100000);
  ASSERT_EQ(out.size(), 2000u);
  double last_a = -1;
  double last_b = -1;
  for (const auto& u : out) {
    double& last = u.frame.subject_id == "a" ? last_a : last_b;
    EXPECT_GT(u.frame.pose.x(), last);
    last = u.frame.pose.x();
  }
}

TEST(Deadlines, RollingAndReleaseDeadlines) {
  EXPECT_EQ(release_deadline(4000, 1500), 5500);
  // 0.3 m left at 0.3 m/s.
  EXPECT_EQ(rolling_deadline(1000, 1500, 0.3), 3500);
  EXPECT_EQ(rolling_deadline(1000, 1500, 0.0), 2500);
}

TEST(PredictSetdown, NearestAnchorOrOwnPose) {
  const auto w = Workspace::default_tabletop();
  VirtualObject mug{"mug", Pose2D(0.40, 0.20), std::string("u"), VisualKind::mug, 0.0};
  const TrackedFrame hand{"u", mug.pose, 0};
  EXPECT_LT(distance(predict_setdown(mug, hand, w.anchors()).position(), Vec2{0.45, 0.15}), 1e-12);
  EXPECT_EQ(predict_setdown(mug, hand, {}), mug.pose);
  mug.held_by.reset();
  EXPECT_THROW(predict_setdown(mug, hand, w.anchors()), ContractViolation);
}

TEST(SetdownPredictor, ExtrapolatesAlongTheLineOfTravel) {
  const auto w = Workspace::default_tabletop();
  SetdownPredictor p;
  EXPECT_FALSE(p.predict(w.anchors()));
  // Leaving tile 1 toward tile 3: the nearest anchor is still tile 1, the
  // motion ray ends at tile 3.
  p.observe(Pose2D(0.15, 0.15), 0);
  p.observe(Pose2D(0.153, 0.15), 10);
  EXPECT_LT(distance(p.predict(w.anchors())->position(), Vec2{0.75, 0.15}), 1e-12);
  // Diagonal toward tile 9.
  p.reset();
  p.observe(Pose2D(0.15, 0.15), 0);
  p.observe(Pose2D(0.152, 0.152), 10);
  EXPECT_LT(distance(p.predict(w.anchors())->position(), Vec2{0.75, 0.75}), 1e-12);
  // Standing still falls back to the nearest anchor.
  p.observe(Pose2D(0.44, 0.47), 20);
  p.observe(Pose2D(0.44, 0.47), 30);
  EXPECT_LT(distance(p.predict(w.anchors())->position(), Vec2{0.45, 0.45}), 1e-12);
}

TEST(CatchUp, PlansOntoTheTaskGoalAndChecksOwnership) {
  const RobotProxy r{"pb", "b", KinematicProfile::tabletop(), Pose2D(0.15, 0.15), ProxyState::idle, std::nullopt};
  const RetargetTask task{"pb", Pose2D(0.75, 0.15), 5000, PredictionSource::release_event, 1};
  const auto res = schedule_remote_catch_up(task, r, {}, Workspace::default_tabletop(), 1000);
  const auto& plan = std::get<motion::MotionPlan>(res);
  EXPECT_EQ(plan.estimated_arrival, 3400);
  EXPECT_EQ(plan.deadline, 5000);
  RetargetTask other = task;
  other.proxy_id = "pa";
  EXPECT_THROW(schedule_remote_catch_up(other, r, {}, Workspace::default_tabletop(), 0), ContractViolation);
}

TEST(ReplanGate, SpacesReplansByTheInterval) {
  ReplanGate g;
  EXPECT_TRUE(g.ready(0));
  g.mark(50);
  EXPECT_FALSE(g.ready(149));
  EXPECT_TRUE(g.ready(150));
}
