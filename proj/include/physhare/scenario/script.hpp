#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "physhare/core/error.hpp"
#include "physhare/core/types.hpp"
#include "physhare/sim/simulation.hpp"

namespace physhare::scenario {

inline constexpr int kScriptFormat = 1;

/// Knobs shared by every generator. Unset optionals take the scenario's
/// own default (e.g. the floor profile speed for wall-push).
struct Parameters {
  Millis artificial_latency = 1500;
  std::optional<double> robot_speed;
  double hand_speed = 0.3;
  std::optional<double> table_size;
  Millis frame_interval = 10;
  std::uint64_t seed = 1;
  Millis relay_delay = 0;
  Millis relay_jitter = 0;
  /// Generator-specific extras (counts, layout choices).
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const Parameters&) const = default;
};

/// What a gesture injection should achieve.
struct GestureExpectation {
  /// Unset: the motion must not produce any gesture.
  std::optional<gesture::GestureKind> kind;
  std::optional<ObjectId> object;
  std::optional<std::string> anchor;

  bool operator==(const GestureExpectation&) const = default;
};

struct WristPoint {
  Millis offset = 0;
  Pose2D pose;

  bool operator==(const WristPoint&) const = default;
};

enum class EventType { grasp, release, hand_frame, hand_path, gesture_injection, touch };

std::string_view to_string(EventType t);
EventType event_type_from_string(std::string_view s);

/// One scripted action. Poses are in the acting site's local frame.
struct ScriptEvent {
  EventType type = EventType::hand_frame;
  Millis t = 0;
  SiteId site;
  UserId user;
  ObjectId object;
  sim::GraspMode mode = sim::GraspMode::physical;
  Pose2D pose;
  /// hand-path: constant-speed polyline starting at pose.
  std::vector<Vec2> waypoints;
  double speed = 0.0;
  /// gesture-injection: wrist samples relative to t.
  std::vector<WristPoint> samples;
  std::optional<GestureExpectation> expect;

  bool operator==(const ScriptEvent&) const = default;
};

struct ScenarioScript {
  std::string name;
  Parameters parameters;
  Workspace workspace = Workspace::default_tabletop();
  std::vector<sim::SiteConfig> sites;
  std::vector<VirtualObject> objects;
  std::vector<RobotProxy> proxies;
  std::vector<sim::BindingSpec> bindings;
  std::vector<ScriptEvent> events;
  /// Simulated time at which the run stops.
  Millis duration = 0;
};

/// Raised with every problem found, one per entry.
class ScriptError : public Error {
 public:
  explicit ScriptError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

inline const std::vector<std::string> kScenarioNames = {"tictactoe", "telekinesis", "city-builder", "clink-mugs",
                                                        "wall-push"};

nlohmann::json to_json(const Parameters& p);
Parameters parameters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScriptEvent& e);
nlohmann::json to_json(const ScenarioScript& s);
/// Parses and validates; throws ScriptError listing every violation.
ScenarioScript script_from_json(const nlohmann::json& j);
ScenarioScript load_script(const std::string& path);
void save_script(const ScenarioScript& s, const std::string& path);

/// Every violation found in `s`; empty when valid.
std::vector<std::string> validate(const ScenarioScript& s);

/// A site input together with the time it is sent.
struct TimedInput {
  sim::SiteInput input;
  /// Position in the script, for stable ordering.
  std::size_t order = 0;
};

/// Expands paths and gesture injections into individual frames, ordered by
/// timestamp with frames ahead of actions at equal times.
std::vector<TimedInput> expand(const ScenarioScript& s);

/// Frames of a hand path: positions at t, t+interval, ... ending exactly at
/// the last waypoint. Returns (timestamp, local pose) pairs.
std::vector<std::pair<Millis, Pose2D>> sample_hand_path(Millis t, const Pose2D& start, const std::vector<Vec2>& waypoints,
                                                        double speed, Millis interval);
/// Timestamp of the last frame sample_hand_path() produces.
Millis hand_path_end(Millis t, const Pose2D& start, const std::vector<Vec2>& waypoints, double speed, Millis interval);

}  // namespace physhare::scenario
