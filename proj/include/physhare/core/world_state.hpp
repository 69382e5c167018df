#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "physhare/core/types.hpp"

namespace physhare {

/// Read-only summary of a proxy's outstanding retarget goal.
struct TaskSnapshot {
  Pose2D goal;
  std::optional<Millis> deadline;
  std::uint32_t revision = 0;
  std::string source;

  bool operator==(const TaskSnapshot&) const = default;
};

/// Complete simulation state at a tick boundary. Virtual object poses are in
/// the shared frame; proxy poses are in their own site's local frame.
struct WorldState {
  std::int64_t tick = 0;
  Millis sim_time = 0;
  std::map<ObjectId, VirtualObject> objects;
  std::map<ProxyId, RobotProxy> proxies;
  std::map<std::string, MappingBinding> bindings;
  /// What each site's user currently sees (shared frame). Remote motion
  /// reaches a site only after that site's artificial latency.
  std::map<SiteId, std::map<ObjectId, Pose2D>> views;
  /// Remaining waypoints of each moving proxy (local frame).
  std::map<ProxyId, std::vector<Pose2D>> plans;
  std::map<ProxyId, TaskSnapshot> tasks;

  bool operator==(const WorldState&) const = default;
};

nlohmann::json to_json(const WorldState& state);
/// Canonical bytes (sorted keys, fixed precision) used for digests and golden files.
std::string canonical_json(const WorldState& state);
std::string state_digest(const WorldState& state);

}  // namespace physhare
