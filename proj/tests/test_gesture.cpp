#include <gtest/gtest.h>

#include <fstream>

#include "json.hpp"
#include "physhare/gesture/gesture.hpp"

using namespace physhare;
using namespace physhare::gesture;

namespace {

std::vector<WristSample> straight(Vec2 start, Vec2 velocity, double facing, Millis duration, Millis step = 10) {
  std::vector<WristSample> out;
  for (Millis t = 0; t <= duration; t += step) {
    out.push_back({"u", Pose2D(start + velocity * (t / 1000.0), facing), t});
  }
  return out;
}

VirtualObject mug_at(const Workspace& w, int tile) {
  return {"mug", w.find_anchor("tile-" + std::to_string(tile))->pose, std::nullopt, VisualKind::mug, 0.0};
}

GestureEvent event(GestureKind kind, Vec2 direction) { return {"u", kind, direction, 0.4, 0}; }

std::string anchor_of(const Resolution& r) {
  const auto* t = std::get_if<TargetResolution>(&r);
  return t && t->anchor ? *t->anchor : std::string("none");
}

}  // namespace

TEST(GestureCorpus, EveryTrajectoryIsLabelledCorrectly) {
  std::ifstream in(PHYSHARE_TEST_DATA "/gesture_corpus.json");
  ASSERT_TRUE(in) << "missing corpus";
  const auto corpus = nlohmann::json::parse(in).at("trajectories");
  ASSERT_EQ(corpus.size(), 36u);
  int correct = 0;
  for (const auto& tr : corpus) {
    GestureRecognizer rec;
    std::vector<GestureEvent> events;
    for (const auto& s : tr.at("samples")) {
      const WristSample w{"u", Pose2D(s.at("x").get<double>(), s.at("y").get<double>(), s.at("heading").get<double>()),
                          s.at("t").get<Millis>()};
      if (auto e = rec.feed(w)) events.push_back(*e);
    }
    const auto label = tr.at("label").get<std::string>();
    const bool ok = label == "none" ? events.empty()
                                    : events.size() == 1 && to_string(events[0].kind) == label;
    EXPECT_TRUE(ok) << tr.at("id").get<std::string>() << ": " << events.size() << " events"
                    << (events.empty() ? std::string() : ", first " + std::string(to_string(events[0].kind)));
    correct += ok;
  }
  EXPECT_EQ(correct, 36);
}

TEST(Classify, ForwardBackwardAndLateralRelativeToFacing) {
  // Facing -y (away from the near edge).
  const double facing = -kPi / 2;
  EXPECT_EQ(classify(straight({0.4, 0.9}, {0.0, -0.4}, facing, 200))->kind, GestureKind::push);
  EXPECT_EQ(classify(straight({0.4, 0.9}, {0.0, 0.4}, facing, 200))->kind, GestureKind::pull);
  const auto slide = classify(straight({0.4, 0.9}, {0.4, 0.0}, facing, 200));
  ASSERT_TRUE(slide);
  EXPECT_EQ(slide->kind, GestureKind::slide);
  EXPECT_NEAR(slide->direction.x, 1.0, 1e-9);
  EXPECT_FALSE(classify(straight({0.4, 0.9}, {0.0, -0.1}, facing, 200)));
}

TEST(Classify, NeedsAFullWindowOfOrderedSamples) {
  EXPECT_THROW(classify(straight({0, 0}, {0.5, 0}, 0.0, 100)), ContractViolation);
  std::vector<WristSample> one = {{"u", Pose2D(0, 0), 0}};
  EXPECT_THROW(classify(one), ContractViolation);
  auto bad = straight({0, 0}, {0.5, 0}, 0.0, 200);
  std::swap(bad[3], bad[4]);
  EXPECT_THROW(classify(bad), CorruptInput);
}

TEST(Classify, AMomentaryReversalInsideTheWindowVetoes) {
  auto s = straight({0.4, 0.9}, {0.0, -0.4}, -kPi / 2, 200);
  s[s.size() - 5].pose = s[s.size() - 7].pose;
  EXPECT_FALSE(classify(s));
}

TEST(Recognizer, RefractoryPeriodSuppressesRepeats) {
  GestureRecognizer rec;
  int fired = 0;
  for (const auto& w : straight({0.4, 0.9}, {0.0, -0.4}, -kPi / 2, 600)) fired += rec.feed(w).has_value();
  EXPECT_EQ(fired, 2);  // at 150 ms and again once 400 ms have passed
}

TEST(ResolveTarget, PullFromFarRowLandsInFrontOfTheUser) {
  const auto w = Workspace::default_tabletop();
  const std::vector<VirtualObject> objs = {mug_at(w, 2)};
  const TrackedFrame user{"u", Pose2D(0.45, 0.95, -kPi / 2), 0};
  EXPECT_EQ(anchor_of(resolve_target(event(GestureKind::pull, {0, 1}), user, objs, w)), "tile-8");
}

TEST(ResolveTarget, PushSendsToFarthestAnchorOnTheRay) {
  const auto w = Workspace::default_tabletop();
  const std::vector<VirtualObject> objs = {mug_at(w, 7)};
  const TrackedFrame user{"u", Pose2D(0.15, 0.95, -kPi / 2), 0};
  EXPECT_EQ(anchor_of(resolve_target(event(GestureKind::push, {0, -1}), user, objs, w)), "tile-1");
}

TEST(ResolveTarget, SlideGoesToNextAnchorAlongside) {
  const auto w = Workspace::default_tabletop();
  const std::vector<VirtualObject> objs = {mug_at(w, 8)};
  const TrackedFrame user{"u", Pose2D(0.45, 0.95, -kPi / 2), 0};
  EXPECT_EQ(anchor_of(resolve_target(event(GestureKind::slide, {1, 0}), user, objs, w)), "tile-9");
  EXPECT_EQ(anchor_of(resolve_target(event(GestureKind::slide, {-1, 0}), user, objs, w)), "tile-7");
}

TEST(ResolveTarget, ObjectsOutsideTheConeAreIgnored) {
  const auto w = Workspace::default_tabletop();
  const std::vector<VirtualObject> objs = {mug_at(w, 4)};
  const TrackedFrame user{"u", Pose2D(0.75, 0.95, -kPi / 2), 0};
  EXPECT_TRUE(std::holds_alternative<NoTarget>(resolve_target(event(GestureKind::push, {0, -1}), user, objs, w)));
  EXPECT_THROW(resolve_target(event(GestureKind::push, {0, -1}), user, {}, w), ContractViolation);
}

TEST(ResolveTarget, AnchorFreeGoalsStayOnTheTable) {
  const auto w = Workspace::bare_tabletop();
  const std::vector<VirtualObject> objs = {{"mug", Pose2D(0.45, 0.45), std::nullopt, VisualKind::mug, 0.0}};
  const TrackedFrame user{"u", Pose2D(0.45, 0.95, -kPi / 2), 0};
  const auto r = std::get<TargetResolution>(resolve_target(event(GestureKind::push, {0, -1}), user, objs, w));
  EXPECT_FALSE(r.anchor);
  EXPECT_TRUE(w.contains(r.goal));
  EXPECT_LT(r.goal.y(), 0.45);
}
