#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "physhare/core/error.hpp"
#include "physhare/core/pose.hpp"

namespace physhare {

using ObjectId = std::string;
using ProxyId = std::string;
using SiteId = std::string;
using UserId = std::string;

/// One tracked sample of a rigid body (hand, wrist, prop).
struct TrackedFrame {
  std::string subject_id;
  Pose2D pose;
  Millis timestamp = 0;

  bool operator==(const TrackedFrame&) const = default;
};

enum class WorkspaceKind { tabletop, floor };

struct Anchor {
  std::string name;
  Pose2D pose;

  bool operator==(const Anchor&) const = default;
};

/// Rectangular surface [0, width] x [0, depth] with optional snap targets.
class Workspace {
 public:
  Workspace(WorkspaceKind kind, double width, double depth, std::vector<Anchor> anchors = {});

  /// 0.9 m x 0.9 m table with a 3x3 tile grid. Tile k (1-based) sits at
  /// column (k-1)%3, row (k-1)/3; row 0 is the far row.
  static Workspace default_tabletop();
  /// Same table without anchors.
  static Workspace bare_tabletop();
  /// 4 m x 4 m floor area, no anchors.
  static Workspace default_floor();

  WorkspaceKind kind() const { return kind_; }
  double width() const { return width_; }
  double depth() const { return depth_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }

  bool contains(Vec2 p, double margin = 0.0) const;
  bool contains(const Pose2D& p, double margin = 0.0) const { return contains(p.position(), margin); }
  Vec2 clamp(Vec2 p, double margin = 0.0) const;
  const Anchor* find_anchor(std::string_view name) const;

  bool operator==(const Workspace&) const = default;

 private:
  WorkspaceKind kind_;
  double width_;
  double depth_;
  std::vector<Anchor> anchors_;
};

/// Maps poses between the shared virtual frame and one site's local table.
/// A mirrored site sits across the table: its local frame is the shared frame
/// rotated half a turn about the table center.
struct SiteFrame {
  bool mirrored = false;
  double width = 0.0;
  double depth = 0.0;

  Pose2D to_local(const Pose2D& shared) const;
  Pose2D to_shared(const Pose2D& local) const;
  Vec2 direction_to_local(Vec2 shared) const { return mirrored ? shared * -1.0 : shared; }
  Vec2 direction_to_shared(Vec2 local) const { return direction_to_local(local); }
};

enum class VisualKind { mug, building, controller, wall, tile_marker };

struct VirtualObject {
  ObjectId id;
  Pose2D pose;
  std::optional<UserId> held_by;
  VisualKind visual_kind = VisualKind::mug;
  /// Length of a wall along its heading; zero for compact objects.
  double extent = 0.0;

  bool operator==(const VirtualObject&) const = default;
};

enum class ProfileKind { tabletop, floor };

struct KinematicProfile {
  ProfileKind kind = ProfileKind::tabletop;
  double max_linear_speed = 0.25;
  double max_angular_speed = kPi;
  double footprint_radius = 0.05;

  /// m3pi-class desk robot.
  static KinematicProfile tabletop();
  /// Create-class floor robot carrying a wall panel.
  static KinematicProfile floor();

  void validate() const;
  bool operator==(const KinematicProfile&) const = default;
};

enum class ProxyState { idle, repositioning, engaged };

struct RobotProxy {
  ProxyId id;
  SiteId site;
  KinematicProfile profile;
  Pose2D pose;
  ProxyState state = ProxyState::idle;
  /// Set while a user physically holds the robot; its pose then follows the hand.
  std::optional<UserId> carried_by;

  bool operator==(const RobotProxy&) const = default;
};

enum class BindingKind { one_to_one, one_to_many, many_to_one };

struct ProxyRef {
  ProxyId proxy;
  SiteId site;

  auto operator<=>(const ProxyRef&) const = default;
};

/// Who currently holds the bound virtual object.
struct Authority {
  SiteId site;
  UserId user;
  Millis grasped_at = 0;

  bool operator==(const Authority&) const = default;
};

struct MappingBinding {
  std::string id;
  BindingKind kind = BindingKind::one_to_one;
  std::vector<ObjectId> virtual_ids;
  std::vector<ProxyRef> proxies;
  /// Proxy currently fulfilling the binding, per site.
  std::map<SiteId, ProxyId> active;
  /// Object each site's active proxy currently stands in for (one-to-many).
  std::map<SiteId, ObjectId> focus;
  std::optional<Authority> authority;

  bool has_proxy(std::string_view proxy_id) const;
  bool has_object(std::string_view object_id) const;
  std::vector<ProxyId> proxies_at(std::string_view site) const;

  bool operator==(const MappingBinding&) const = default;
};

std::string_view to_string(WorkspaceKind k);
std::string_view to_string(VisualKind k);
std::string_view to_string(ProfileKind k);
std::string_view to_string(ProxyState s);
std::string_view to_string(BindingKind k);

WorkspaceKind workspace_kind_from_string(std::string_view s);
VisualKind visual_kind_from_string(std::string_view s);
ProfileKind profile_kind_from_string(std::string_view s);
ProxyState proxy_state_from_string(std::string_view s);
BindingKind binding_kind_from_string(std::string_view s);

}  // namespace physhare
