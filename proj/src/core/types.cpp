#include "physhare/core/types.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "physhare/core/error.hpp"

namespace physhare {

Workspace::Workspace(WorkspaceKind kind, double width, double depth, std::vector<Anchor> anchors)
    : kind_(kind), width_(width), depth_(depth), anchors_(std::move(anchors)) {
  if (!(width_ > 0.0) || !(depth_ > 0.0)) {
    throw ContractViolation("workspace width and depth must be positive");
  }
  for (const auto& a : anchors_) {
    if (!contains(a.pose)) {
      throw ContractViolation("anchor '" + a.name + "' lies outside the workspace");
    }
  }
}

Workspace Workspace::default_tabletop() {
  std::vector<Anchor> anchors;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      const int tile = row * 3 + col + 1;
      anchors.push_back({"tile-" + std::to_string(tile), Pose2D(0.15 + 0.3 * col, 0.15 + 0.3 * row)});
    }
  }
  return {WorkspaceKind::tabletop, 0.9, 0.9, std::move(anchors)};
}

Workspace Workspace::bare_tabletop() { return {WorkspaceKind::tabletop, 0.9, 0.9}; }

Workspace Workspace::default_floor() { return {WorkspaceKind::floor, 4.0, 4.0}; }

bool Workspace::contains(Vec2 p, double margin) const {
  return p.x >= margin && p.x <= width_ - margin && p.y >= margin && p.y <= depth_ - margin;
}

Vec2 Workspace::clamp(Vec2 p, double margin) const {
  return {std::clamp(p.x, margin, width_ - margin), std::clamp(p.y, margin, depth_ - margin)};
}

const Anchor* Workspace::find_anchor(std::string_view name) const {
  auto it = std::find_if(anchors_.begin(), anchors_.end(), [&](const Anchor& a) { return a.name == name; });
  return it == anchors_.end() ? nullptr : &*it;
}

Pose2D SiteFrame::to_local(const Pose2D& shared) const {
  if (!mirrored) {
    return shared;
  }
  return {width - shared.x(), depth - shared.y(), shared.heading() + kPi};
}

Pose2D SiteFrame::to_shared(const Pose2D& local) const { return to_local(local); }

KinematicProfile KinematicProfile::tabletop() { return {ProfileKind::tabletop, 0.25, kPi, 0.05}; }

KinematicProfile KinematicProfile::floor() { return {ProfileKind::floor, 0.3, kPi / 2.0, 0.20}; }

void KinematicProfile::validate() const {
  if (!(max_linear_speed > 0.0) || !(max_angular_speed > 0.0) || !(footprint_radius > 0.0)) {
    throw ContractViolation("kinematic profile limits must be positive");
  }
}

bool MappingBinding::has_proxy(std::string_view proxy_id) const {
  return std::any_of(proxies.begin(), proxies.end(), [&](const ProxyRef& r) { return r.proxy == proxy_id; });
}

bool MappingBinding::has_object(std::string_view object_id) const {
  return std::find(virtual_ids.begin(), virtual_ids.end(), object_id) != virtual_ids.end();
}

std::vector<ProxyId> MappingBinding::proxies_at(std::string_view site) const {
  std::vector<ProxyId> out;
  for (const auto& r : proxies) {
    if (r.site == site) {
      out.push_back(r.proxy);
    }
  }
  return out;
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table, const char* what) {
  for (const auto& [value, name] : table) {
    if (name == s) {
      return value;
    }
  }
  throw ContractViolation(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view print_enum(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == v) {
      return name;
    }
  }
  return "?";
}

constexpr std::array<std::pair<WorkspaceKind, std::string_view>, 2> kWorkspaceKinds{{
    {WorkspaceKind::tabletop, "tabletop"},
    {WorkspaceKind::floor, "floor"},
}};

constexpr std::array<std::pair<VisualKind, std::string_view>, 5> kVisualKinds{{
    {VisualKind::mug, "mug"},
    {VisualKind::building, "building"},
    {VisualKind::controller, "controller"},
    {VisualKind::wall, "wall"},
    {VisualKind::tile_marker, "tile-marker"},
}};

constexpr std::array<std::pair<ProfileKind, std::string_view>, 2> kProfileKinds{{
    {ProfileKind::tabletop, "tabletop"},
    {ProfileKind::floor, "floor"},
}};

constexpr std::array<std::pair<ProxyState, std::string_view>, 3> kProxyStates{{
    {ProxyState::idle, "idle"},
    {ProxyState::repositioning, "repositioning"},
    {ProxyState::engaged, "engaged"},
}};

constexpr std::array<std::pair<BindingKind, std::string_view>, 3> kBindingKinds{{
    {BindingKind::one_to_one, "one-to-one"},
    {BindingKind::one_to_many, "one-to-many"},
    {BindingKind::many_to_one, "many-to-one"},
}};

}  // namespace

std::string_view to_string(WorkspaceKind k) { return print_enum(k, kWorkspaceKinds); }
std::string_view to_string(VisualKind k) { return print_enum(k, kVisualKinds); }
std::string_view to_string(ProfileKind k) { return print_enum(k, kProfileKinds); }
std::string_view to_string(ProxyState s) { return print_enum(s, kProxyStates); }
std::string_view to_string(BindingKind k) { return print_enum(k, kBindingKinds); }

WorkspaceKind workspace_kind_from_string(std::string_view s) { return parse_enum(s, kWorkspaceKinds, "workspace kind"); }
VisualKind visual_kind_from_string(std::string_view s) { return parse_enum(s, kVisualKinds, "visual kind"); }
ProfileKind profile_kind_from_string(std::string_view s) { return parse_enum(s, kProfileKinds, "profile"); }
ProxyState proxy_state_from_string(std::string_view s) { return parse_enum(s, kProxyStates, "proxy state"); }
BindingKind binding_kind_from_string(std::string_view s) { return parse_enum(s, kBindingKinds, "binding kind"); }

}  // namespace physhare
