#include <gtest/gtest.h>

#include <random>

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/json_codec.hpp"
#include "physhare/core/world_state.hpp"

using namespace physhare;

TEST(Pose, HeadingWrapsIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(normalize_heading(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_heading(-kPi), kPi);
  EXPECT_NEAR(normalize_heading(3 * kPi / 2), -kPi / 2, 1e-12);
  EXPECT_NEAR(heading_delta(kPi - 0.1, -kPi + 0.1), 0.2, 1e-12);
  EXPECT_THROW(Pose2D(std::nan(""), 0.0), std::invalid_argument);
}

TEST(Pose, NegativeZeroIsCanonicalized) {
  const Pose2D p(-0.0, -0.0, -0.0);
  EXPECT_EQ(canonical_dump(nlohmann::json(p)), canonical_dump(nlohmann::json(Pose2D(0, 0, 0))));
}

TEST(SiteFrame, MirrorRoundTripsRandomPoses) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.0, 0.9);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const SiteFrame f{true, 0.9, 0.9};
  for (int i = 0; i < 500; ++i) {
    const Pose2D p(pos(rng), pos(rng), ang(rng));
    const Pose2D back = f.to_shared(f.to_local(p));
    EXPECT_NEAR(back.x(), p.x(), 1e-12);
    EXPECT_NEAR(back.y(), p.y(), 1e-12);
    EXPECT_NEAR(heading_delta(back.heading(), p.heading()), 0.0, 1e-9);
  }
}

TEST(SiteFrame, MirroredSiteSeesTheFarCornerAsItsOwn) {
  const SiteFrame f{true, 0.9, 0.9};
  const Pose2D local = f.to_local(Pose2D(0.15, 0.15, 0.0));
  EXPECT_NEAR(local.x(), 0.75, 1e-12);
  EXPECT_NEAR(local.y(), 0.75, 1e-12);
  EXPECT_NEAR(std::abs(local.heading()), kPi, 1e-12);
}

TEST(Workspace, DefaultTabletopTilesAreRowMajorFromFarRow) {
  const auto w = Workspace::default_tabletop();
  ASSERT_EQ(w.anchors().size(), 9u);
  EXPECT_LT(distance(w.find_anchor("tile-2")->pose.position(), Vec2{0.45, 0.15}), 1e-12);
  EXPECT_LT(distance(w.find_anchor("tile-8")->pose.position(), Vec2{0.45, 0.75}), 1e-12);
  EXPECT_EQ(w.find_anchor("tile-10"), nullptr);
  EXPECT_THROW(Workspace(WorkspaceKind::tabletop, 0.0, 1.0), ContractViolation);
  EXPECT_THROW(Workspace(WorkspaceKind::tabletop, 1.0, 1.0, {{"out", Pose2D(2.0, 0.5)}}), ContractViolation);
}

TEST(KinematicProfile, RejectsNonPositiveLimits) {
  auto p = KinematicProfile::tabletop();
  p.max_linear_speed = 0.0;
  EXPECT_THROW(p.validate(), ContractViolation);
  EXPECT_NO_THROW(KinematicProfile::floor().validate());
}

TEST(CanonicalJson, KeyOrderAndPrecisionAreFixed) {
  const nlohmann::json a = {{"b", 1.0 / 3.0}, {"a", {1, 2}}};
  const nlohmann::json b = {{"a", {1, 2}}, {"b", 0.33333333333}};
  EXPECT_EQ(canonical_dump(a), canonical_dump(b));
  EXPECT_EQ(canonical_dump(a), R"({"a":[1,2],"b":0.333333})");
  EXPECT_THROW(canonical_dump(nlohmann::json(std::numeric_limits<double>::infinity())), std::invalid_argument);
}

TEST(CanonicalJson, DigestIsSha256OfCanonicalBytes) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_NE(chain_digest("a", "bc"), chain_digest("ab", "c1"));
}

TEST(WorldState, StateDigestChangesWithAnyField) {
  WorldState s;
  s.objects["mug"] = {"mug", Pose2D(0.1, 0.2), std::nullopt, VisualKind::mug, 0.0};
  const auto d0 = state_digest(s);
  EXPECT_EQ(d0, state_digest(s));
  s.objects["mug"].pose = Pose2D(0.1, 0.2000011);
  EXPECT_NE(d0, state_digest(s));
}

TEST(JsonCodec, ObjectsAndProxiesRoundTrip) {
  const VirtualObject o{"wall", Pose2D(2.0, 3.0, 0.5), std::string("u"), VisualKind::wall, 3.5};
  EXPECT_EQ(nlohmann::json(o).get<VirtualObject>(), o);
  const RobotProxy r{"p", "a", KinematicProfile::floor(), Pose2D(1, 1, 1), ProxyState::engaged, std::nullopt};
  EXPECT_EQ(nlohmann::json(r).get<RobotProxy>(), r);
  EXPECT_EQ(nlohmann::json::parse("[0.5, 0.25, 1.0]").get<Pose2D>(), Pose2D(0.5, 0.25, 1.0));
}
