#include "physhare/core/json_codec.hpp"

namespace physhare {

void to_json(nlohmann::json& j, const Vec2& v) { j = {{"x", v.x}, {"y", v.y}}; }

void from_json(const nlohmann::json& j, Vec2& v) {
  if (j.is_array()) {
    v = {j.at(0).get<double>(), j.at(1).get<double>()};
    return;
  }
  v = {j.at("x").get<double>(), j.at("y").get<double>()};
}

void to_json(nlohmann::json& j, const Pose2D& p) { j = {{"x", p.x()}, {"y", p.y()}, {"heading", p.heading()}}; }

void from_json(const nlohmann::json& j, Pose2D& p) {
  if (j.is_array()) {
    p = Pose2D(j.at(0).get<double>(), j.at(1).get<double>(), j.size() > 2 ? j.at(2).get<double>() : 0.0);
    return;
  }
  p = Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.value("heading", 0.0));
}

void to_json(nlohmann::json& j, const TrackedFrame& f) {
  j = {{"subject_id", f.subject_id}, {"pose", f.pose}, {"timestamp", f.timestamp}};
}

void from_json(const nlohmann::json& j, TrackedFrame& f) {
  f.subject_id = j.at("subject_id").get<std::string>();
  f.pose = j.at("pose").get<Pose2D>();
  f.timestamp = j.at("timestamp").get<Millis>();
}

void to_json(nlohmann::json& j, const Anchor& a) { j = {{"name", a.name}, {"pose", a.pose}}; }

void to_json(nlohmann::json& j, const Workspace& w) {
  j = {{"kind", to_string(w.kind())}, {"width", w.width()}, {"depth", w.depth()}, {"anchors", w.anchors()}};
}

Workspace workspace_from_json(const nlohmann::json& j) {
  const auto kind = workspace_kind_from_string(j.at("kind").get<std::string>());
  if (j.value("preset", std::string{}) == "default") {
    return kind == WorkspaceKind::floor ? Workspace::default_floor() : Workspace::default_tabletop();
  }
  std::vector<Anchor> anchors;
  for (const auto& a : j.value("anchors", nlohmann::json::array())) {
    anchors.push_back({a.at("name").get<std::string>(), a.at("pose").get<Pose2D>()});
  }
  return {kind, j.at("width").get<double>(), j.at("depth").get<double>(), std::move(anchors)};
}

void to_json(nlohmann::json& j, const VirtualObject& o) {
  j = {{"id", o.id},
       {"pose", o.pose},
       {"held_by", o.held_by ? nlohmann::json(*o.held_by) : nlohmann::json(nullptr)},
       {"visual_kind", to_string(o.visual_kind)},
       {"extent", o.extent}};
}

void from_json(const nlohmann::json& j, VirtualObject& o) {
  o.id = j.at("id").get<std::string>();
  o.pose = j.at("pose").get<Pose2D>();
  o.held_by.reset();
  if (j.contains("held_by") && !j.at("held_by").is_null()) {
    o.held_by = j.at("held_by").get<std::string>();
  }
  o.visual_kind = visual_kind_from_string(j.value("visual_kind", std::string("mug")));
  o.extent = j.value("extent", 0.0);
}

void to_json(nlohmann::json& j, const KinematicProfile& p) {
  j = {{"profile", to_string(p.kind)},
       {"max_linear_speed", p.max_linear_speed},
       {"max_angular_speed", p.max_angular_speed},
       {"footprint_radius", p.footprint_radius}};
}

void from_json(const nlohmann::json& j, KinematicProfile& p) {
  const auto kind = profile_kind_from_string(j.value("profile", std::string("tabletop")));
  p = kind == ProfileKind::floor ? KinematicProfile::floor() : KinematicProfile::tabletop();
  p.max_linear_speed = j.value("max_linear_speed", p.max_linear_speed);
  p.max_angular_speed = j.value("max_angular_speed", p.max_angular_speed);
  p.footprint_radius = j.value("footprint_radius", p.footprint_radius);
  p.validate();
}

void to_json(nlohmann::json& j, const RobotProxy& r) {
  j = {{"id", r.id},
       {"site", r.site},
       {"profile", r.profile},
       {"pose", r.pose},
       {"state", to_string(r.state)},
       {"carried_by", r.carried_by ? nlohmann::json(*r.carried_by) : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, RobotProxy& r) {
  r.id = j.at("id").get<std::string>();
  r.site = j.at("site").get<std::string>();
  r.profile = j.contains("profile") ? j.at("profile").get<KinematicProfile>() : KinematicProfile::tabletop();
  r.pose = j.at("pose").get<Pose2D>();
  r.state = j.contains("state") ? proxy_state_from_string(j.at("state").get<std::string>()) : ProxyState::idle;
  r.carried_by.reset();
  if (j.contains("carried_by") && !j.at("carried_by").is_null()) r.carried_by = j.at("carried_by").get<std::string>();
}

void to_json(nlohmann::json& j, const ProxyRef& r) { j = {{"proxy", r.proxy}, {"site", r.site}}; }

void from_json(const nlohmann::json& j, ProxyRef& r) {
  r.proxy = j.at("proxy").get<std::string>();
  r.site = j.at("site").get<std::string>();
}

void to_json(nlohmann::json& j, const Authority& a) {
  j = {{"site", a.site}, {"user", a.user}, {"grasped_at", a.grasped_at}};
}

void to_json(nlohmann::json& j, const MappingBinding& b) {
  j = {{"id", b.id},
       {"kind", to_string(b.kind)},
       {"virtual_ids", b.virtual_ids},
       {"proxies", b.proxies},
       {"active", b.active},
       {"focus", b.focus},
       {"authority", b.authority ? nlohmann::json(*b.authority) : nlohmann::json(nullptr)}};
}

}  // namespace physhare
