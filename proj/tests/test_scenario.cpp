#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "physhare/core/canonical_json.hpp"
#include "physhare/scenario/generators.hpp"
#include "physhare/scenario/harness.hpp"

using namespace physhare;
using namespace physhare::scenario;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(TileTour, VisitsEveryOrderedPairOnceAndChains) {
  const auto tour = tile_tour();
  ASSERT_EQ(tour.size(), 81u);
  std::set<std::pair<int, int>> seen(tour.begin(), tour.end());
  EXPECT_EQ(seen.size(), 81u);
  for (const auto& [from, to] : tour) {
    EXPECT_GE(from, 1);
    EXPECT_LE(to, 9);
  }
  EXPECT_EQ(tour.front().first, 1);
  for (std::size_t i = 1; i < tour.size(); ++i) EXPECT_EQ(tour[i].first, tour[i - 1].second);
}

TEST(HandPath, ConstantSpeedAndExactEndpoint) {
  const Pose2D start(0.15, 0.15, 0.0);
  const std::vector<Vec2> wps = {{0.45, 0.15}, {0.45, 0.52}};
  const auto frames = sample_hand_path(100, start, wps, 0.3, 10);
  ASSERT_GE(frames.size(), 2u);
  EXPECT_EQ(frames.front().first, 100);
  EXPECT_EQ(frames.back().first, hand_path_end(100, start, wps, 0.3, 10));
  EXPECT_EQ(frames.back().second.position(), wps.back());
  for (std::size_t i = 1; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].first - frames[i - 1].first, 10);
    EXPECT_LE(distance(frames[i].second, frames[i - 1].second), 0.003 + 1e-9);
  }
  // 0.67 m at 3 mm per frame.
  EXPECT_EQ(frames.size(), 1u + 224u);
  EXPECT_THROW(sample_hand_path(0, start, wps, 0.0, 10), ContractViolation);
}

TEST(Script, RoundTripsThroughJson) {
  for (const auto& name : kScenarioNames) {
    const auto s = build_script(name, default_parameters(name));
    const auto j = to_json(s);
    const auto back = script_from_json(j);
    EXPECT_EQ(canonical_dump(to_json(back)), canonical_dump(j)) << name;
    EXPECT_EQ(back.events, s.events) << name;
  }
}

TEST(Script, CheckedInScriptsMatchTheGenerators) {
  for (const auto& name : kScenarioNames) {
    const auto path = std::string(PHYSHARE_SCENARIO_DIR) + "/" + name + ".json";
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    const auto generated = to_json(build_script(name, default_parameters(name)));
    EXPECT_EQ(canonical_dump(to_json(load_script(path))), canonical_dump(generated)) << name;
  }
}

TEST(Script, ValidationReportsEveryProblem) {
  auto j = to_json(build_script("tictactoe", default_parameters("tictactoe")));
  j["parameters"]["hand_speed"] = -1.0;
  j["objects"][0]["pose"] = {{"x", 5.0}, {"y", 0.1}, {"heading", 0.0}};
  j["events"][0]["site"] = "mars";
  j["events"][1]["object"] = "nothing";
  j["bindings"][0]["proxies"].push_back("ghost");
  try {
    script_from_json(j);
    FAIL() << "expected ScriptError";
  } catch (const ScriptError& e) {
    const auto& p = e.problems();
    EXPECT_GE(p.size(), 5u);
    EXPECT_TRUE(mentions(p, "hand_speed"));
    EXPECT_TRUE(mentions(p, "outside the workspace"));
    EXPECT_TRUE(mentions(p, "unknown site 'mars'"));
    EXPECT_TRUE(mentions(p, "unknown proxy 'ghost'"));
  }
}

TEST(Script, StructuralErrorsAreCollectedPerSection) {
  nlohmann::json j = {{"format", 7}, {"name", "x"}, {"events", {{{"type", "teleport"}, {"t", 0}}}}};
  try {
    script_from_json(j);
    FAIL() << "expected ScriptError";
  } catch (const ScriptError& e) {
    EXPECT_TRUE(mentions(e.problems(), "unsupported format"));
    EXPECT_TRUE(mentions(e.problems(), "missing"));
    EXPECT_TRUE(mentions(e.problems(), "event 0"));
  }
}

TEST(Script, OverlappingHandFramesAreRejected) {
  auto s = build_script("tictactoe", default_parameters("tictactoe"));
  auto dup = *std::find_if(s.events.begin(), s.events.end(),
                           [](const ScriptEvent& e) { return e.type == EventType::hand_path; });
  s.events.push_back(dup);
  EXPECT_TRUE(mentions(validate(s), "overlapping hand frames"));
}

TEST(Expand, FramesPrecedeActionsAtEqualTimes) {
  const auto s = build_script("tictactoe", default_parameters("tictactoe"));
  const auto inputs = expand(s);
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    const auto& a = inputs[i - 1].input;
    const auto& b = inputs[i].input;
    ASSERT_LE(a.timestamp, b.timestamp);
    if (a.timestamp == b.timestamp) {
      const bool a_frame = a.kind == sim::InputKind::hand || a.kind == sim::InputKind::wrist;
      const bool b_frame = b.kind == sim::InputKind::hand || b.kind == sim::InputKind::wrist;
      EXPECT_FALSE(!a_frame && b_frame) << "at " << a.timestamp;
    }
  }
}

TEST(Parameters, UnknownOrMistypedOverridesAreRejected) {
  const auto p = default_parameters("tictactoe");
  EXPECT_EQ(with_parameter(p, "artificial_latency", 900).artificial_latency, 900);
  EXPECT_DOUBLE_EQ(*with_parameter(p, "robot_speed", 0.1).robot_speed, 0.1);
  EXPECT_THROW(with_parameter(p, "artificial_latency", 12.5), ContractViolation);
  EXPECT_THROW(with_parameter(p, "warp", 1), ContractViolation);
  EXPECT_THROW(default_parameters("chess"), ContractViolation);
  EXPECT_EQ(parameters_from_json(to_json(p)), p);
}

TEST(Harness, ShortTictactoeRunIsCleanAndReproducible) {
  auto p = default_parameters("tictactoe");
  p.extra["moves"] = 6;
  const auto s = build_script("tictactoe", p);
  const auto a = run_scenario(s);
  const auto b = run_scenario(s);
  EXPECT_EQ(a.metrics.setdowns, 6);
  EXPECT_EQ(a.metrics.illusion_breaks, 0);
  for (const auto& [kind, n] : a.metrics.violations) EXPECT_EQ(n, 0) << kind;
  EXPECT_EQ(a.metrics.digest, b.metrics.digest);
  EXPECT_EQ(canonical_dump(to_json(a.metrics)), canonical_dump(to_json(b.metrics)));
}

TEST(Harness, ScenarioRunStepsUntilDone) {
  auto p = default_parameters("tictactoe");
  p.extra["moves"] = 1;
  ScenarioRun run(build_script("tictactoe", p));
  EXPECT_EQ(run.ns(), "tictactoe");
  Millis last = run.now();
  while (!run.done()) {
    run.step();
    EXPECT_EQ(run.now(), last + 10);
    last = run.now();
  }
  const auto result = run.finish();
  EXPECT_EQ(result.metrics.sim_time, run.script().duration);
  EXPECT_TRUE(run.relay().connected(ScenarioRun::kSimClient));
}

TEST(Sweep, EmptyValueListGivesHeaderOnlyTable) {
  const auto s = build_script("wall-push", default_parameters("wall-push"));
  const auto rows = sweep(s, "artificial_latency", {});
  EXPECT_TRUE(rows.empty());
  const auto csv = sweep_csv("artificial_latency", rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("parameter,value,illusion_breaks,", 0), 0u);
}

TEST(Sweep, LatencyParameterReachesTheRun) {
  const auto s = build_script("wall-push", default_parameters("wall-push"));
  const auto rows = sweep(s, "artificial_latency", {0, 800});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].metrics.parameters.artificial_latency, 0);
  EXPECT_EQ(rows[1].metrics.parameters.artificial_latency, 800);
  EXPECT_THROW(sweep(s, "warp", {1}), ContractViolation);
}

TEST(Percentiles, NearestRank) {
  const auto p = percentiles({5, 1, 4, 2, 3, 6, 7, 8, 9, 10});
  EXPECT_EQ(p.count, 10u);
  EXPECT_EQ(p.p50, 5);
  EXPECT_EQ(p.p95, 10);
  EXPECT_EQ(p.max, 10);
  EXPECT_EQ(percentiles({}).p99, 0);
}

TEST(Export, MetricsCsvHasMatchingColumns) {
  const auto m = read_json(std::string(PHYSHARE_SCENARIO_DIR) + "/golden/wall-push.json");
  const auto csv = metrics_csv(m);
  const auto nl = csv.find('\n');
  ASSERT_NE(nl, std::string::npos);
  const auto header = csv.substr(0, nl);
  const auto row = csv.substr(nl + 1);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_NE(header.find("illusion_breaks"), std::string::npos);
}
