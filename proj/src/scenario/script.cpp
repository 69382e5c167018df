#include "physhare/scenario/script.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/json_codec.hpp"

namespace physhare::scenario {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 6> kEventTypes = {{
    {EventType::grasp, "grasp"},
    {EventType::release, "release"},
    {EventType::hand_frame, "hand-frame"},
    {EventType::hand_path, "hand-path"},
    {EventType::gesture_injection, "gesture-injection"},
    {EventType::touch, "touch"},
}};

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += "; ";
    out += l;
  }
  return out;
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json to_json(const sim::SiteConfig& s) {
  return {{"id", s.id}, {"user", s.user}, {"mirrored", s.mirrored}};
}

json to_json(const sim::BindingSpec& b) {
  return {{"kind", physhare::to_string(b.kind)}, {"objects", b.objects}, {"proxies", b.proxies}};
}

}  // namespace

ScriptError::ScriptError(std::vector<std::string> problems)
    : Error("invalid scenario script: " + join(problems)), problems_(std::move(problems)) {}

std::string_view to_string(EventType t) {
  for (const auto& [v, s] : kEventTypes) {
    if (v == t) return s;
  }
  return "?";
}

EventType event_type_from_string(std::string_view s) {
  for (const auto& [v, name] : kEventTypes) {
    if (name == s) return v;
  }
  throw CorruptInput("unknown event type '" + std::string(s) + "'");
}

// ------------------------------------------------------------------ JSON

json to_json(const Parameters& p) {
  json j = {{"artificial_latency", p.artificial_latency},
            {"hand_speed", p.hand_speed},
            {"frame_interval", p.frame_interval},
            {"seed", p.seed},
            {"relay_delay", p.relay_delay},
            {"relay_jitter", p.relay_jitter}};
  j["robot_speed"] = p.robot_speed ? json(*p.robot_speed) : json(nullptr);
  j["table_size"] = p.table_size ? json(*p.table_size) : json(nullptr);
  if (!p.extra.empty()) j["extra"] = p.extra;
  return j;
}

Parameters parameters_from_json(const json& j) {
  Parameters p;
  p.artificial_latency = j.value("artificial_latency", p.artificial_latency);
  p.robot_speed = opt_field<double>(j, "robot_speed");
  p.hand_speed = j.value("hand_speed", p.hand_speed);
  p.table_size = opt_field<double>(j, "table_size");
  p.frame_interval = j.value("frame_interval", p.frame_interval);
  p.seed = j.value("seed", p.seed);
  p.relay_delay = j.value("relay_delay", p.relay_delay);
  p.relay_jitter = j.value("relay_jitter", p.relay_jitter);
  p.extra = j.value("extra", json::object());
  return p;
}

json to_json(const ScriptEvent& e) {
  json j = {{"type", to_string(e.type)}, {"t", e.t}, {"site", e.site}, {"user", e.user}};
  switch (e.type) {
    case EventType::grasp:
      j["object"] = e.object;
      j["mode"] = sim::to_string(e.mode);
      j["pose"] = e.pose;
      break;
    case EventType::release:
      j["object"] = e.object;
      break;
    case EventType::hand_frame:
      j["pose"] = e.pose;
      break;
    case EventType::hand_path:
      j["pose"] = e.pose;
      j["waypoints"] = e.waypoints;
      j["speed"] = e.speed;
      break;
    case EventType::gesture_injection: {
      json samples = json::array();
      for (const auto& s : e.samples) samples.push_back({{"offset", s.offset}, {"pose", s.pose}});
      j["samples"] = std::move(samples);
      if (e.expect) {
        j["expect"] = {{"kind", e.expect->kind ? json(gesture::to_string(*e.expect->kind)) : json(nullptr)},
                       {"object", e.expect->object ? json(*e.expect->object) : json(nullptr)},
                       {"anchor", e.expect->anchor ? json(*e.expect->anchor) : json(nullptr)}};
      }
      break;
    }
    case EventType::touch:
      j["object"] = e.object;
      j["pose"] = e.pose;
      break;
  }
  return j;
}

json to_json(const ScenarioScript& s) {
  json sites = json::array();
  for (const auto& x : s.sites) sites.push_back(to_json(x));
  json bindings = json::array();
  for (const auto& b : s.bindings) bindings.push_back(to_json(b));
  json events = json::array();
  for (const auto& e : s.events) events.push_back(to_json(e));
  return {{"name", s.name},
          {"format", kScriptFormat},
          {"parameters", to_json(s.parameters)},
          {"workspace", s.workspace},
          {"sites", std::move(sites)},
          {"objects", s.objects},
          {"proxies", s.proxies},
          {"bindings", std::move(bindings)},
          {"events", std::move(events)},
          {"duration", s.duration}};
}

namespace {

ScriptEvent event_from_json(const json& j) {
  ScriptEvent e;
  e.type = event_type_from_string(j.at("type").get<std::string>());
  e.t = j.at("t").get<Millis>();
  e.site = j.at("site").get<std::string>();
  e.user = j.at("user").get<std::string>();
  e.object = j.value("object", std::string{});
  e.mode = sim::grasp_mode_from_string(j.value("mode", std::string("physical")));
  if (j.contains("pose")) e.pose = j.at("pose").get<Pose2D>();
  if (j.contains("waypoints")) e.waypoints = j.at("waypoints").get<std::vector<Vec2>>();
  e.speed = j.value("speed", 0.0);
  for (const auto& s : j.value("samples", json::array())) {
    e.samples.push_back({s.at("offset").get<Millis>(), s.at("pose").get<Pose2D>()});
  }
  if (j.contains("expect") && !j.at("expect").is_null()) {
    const json& x = j.at("expect");
    GestureExpectation g;
    if (auto k = opt_field<std::string>(x, "kind")) g.kind = gesture::gesture_kind_from_string(*k);
    g.object = opt_field<std::string>(x, "object");
    g.anchor = opt_field<std::string>(x, "anchor");
    e.expect = g;
  }
  return e;
}

}  // namespace

ScenarioScript script_from_json(const json& j) {
  std::vector<std::string> problems;
  ScenarioScript s;
  auto section = [&](const char* key, auto&& fn) {
    try {
      if (!j.contains(key)) {
        problems.push_back(std::string("missing '") + key + "'");
        return;
      }
      fn(j.at(key));
    } catch (const std::exception& e) {
      problems.push_back(std::string("bad '") + key + "': " + e.what());
    }
  };
  if (!j.is_object()) throw ScriptError({"script must be a JSON object"});
  if (j.contains("format") && j.at("format") != kScriptFormat) {
    problems.push_back("unsupported format " + j.at("format").dump());
  }
  section("name", [&](const json& v) { s.name = v.get<std::string>(); });
  section("parameters", [&](const json& v) { s.parameters = parameters_from_json(v); });
  section("workspace", [&](const json& v) { s.workspace = workspace_from_json(v); });
  section("sites", [&](const json& v) {
    for (const auto& x : v) {
      s.sites.push_back({x.at("id").get<std::string>(), x.at("user").get<std::string>(), x.value("mirrored", false)});
    }
  });
  section("objects", [&](const json& v) { s.objects = v.get<std::vector<VirtualObject>>(); });
  section("proxies", [&](const json& v) { s.proxies = v.get<std::vector<RobotProxy>>(); });
  section("bindings", [&](const json& v) {
    for (const auto& x : v) {
      s.bindings.push_back({binding_kind_from_string(x.at("kind").get<std::string>()),
                            x.at("objects").get<std::vector<std::string>>(),
                            x.at("proxies").get<std::vector<std::string>>()});
    }
  });
  section("events", [&](const json& v) {
    std::size_t i = 0;
    for (const auto& x : v) {
      try {
        s.events.push_back(event_from_json(x));
      } catch (const std::exception& e) {
        problems.push_back("event " + std::to_string(i) + ": " + e.what());
      }
      ++i;
    }
  });
  section("duration", [&](const json& v) { s.duration = v.get<Millis>(); });
  if (!problems.empty()) throw ScriptError(std::move(problems));
  for (auto& site : s.sites) site.artificial_latency = s.parameters.artificial_latency;
  if (auto more = validate(s); !more.empty()) throw ScriptError(std::move(more));
  return s;
}

ScenarioScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open script '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScriptError({std::string("not valid JSON: ") + e.what()});
  }
  return script_from_json(j);
}

void save_script(const ScenarioScript& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write script '" + path + "'");
  out << to_json(s).dump(1) << '\n';
}

// ------------------------------------------------------------------ validation

std::vector<std::string> validate(const ScenarioScript& s) {
  std::vector<std::string> p;
  const auto& prm = s.parameters;
  if (s.name.empty()) p.push_back("name is empty");
  if (prm.artificial_latency < 0) p.push_back("artificial_latency is negative");
  if (!(prm.hand_speed > 0.0)) p.push_back("hand_speed must be positive");
  if (prm.frame_interval <= 0) p.push_back("frame_interval must be positive");
  if (prm.robot_speed && !(*prm.robot_speed > 0.0)) p.push_back("robot_speed must be positive");
  if (prm.table_size && !(*prm.table_size > 0.0)) p.push_back("table_size must be positive");
  if (prm.relay_delay < 0 || prm.relay_jitter < 0) p.push_back("relay delay and jitter must be non-negative");
  if (s.duration <= 0) p.push_back("duration must be positive");

  std::map<SiteId, UserId> users;
  std::set<UserId> user_ids;
  if (s.sites.empty() || s.sites.size() > 2) p.push_back("a script needs one or two sites");
  for (const auto& site : s.sites) {
    if (site.id.empty() || site.user.empty()) p.push_back("site with empty id or user");
    if (!users.emplace(site.id, site.user).second) p.push_back("duplicate site '" + site.id + "'");
    if (!user_ids.insert(site.user).second) p.push_back("user '" + site.user + "' appears at two sites");
  }

  std::set<ObjectId> objects;
  for (const auto& o : s.objects) {
    if (!objects.insert(o.id).second) p.push_back("duplicate object '" + o.id + "'");
    if (!s.workspace.contains(o.pose, -1e-9)) p.push_back("object '" + o.id + "' lies outside the workspace");
  }
  std::set<ProxyId> proxies;
  for (const auto& r : s.proxies) {
    if (!proxies.insert(r.id).second) p.push_back("duplicate proxy '" + r.id + "'");
    if (!users.contains(r.site)) p.push_back("proxy '" + r.id + "' at unknown site '" + r.site + "'");
    if (!s.workspace.contains(r.pose, -1e-9)) p.push_back("proxy '" + r.id + "' lies outside the workspace");
    try {
      r.profile.validate();
    } catch (const Error& e) {
      p.push_back("proxy '" + r.id + "': " + e.what());
    }
  }
  for (std::size_t i = 0; i < s.bindings.size(); ++i) {
    const auto& b = s.bindings[i];
    for (const auto& o : b.objects) {
      if (!objects.contains(o)) p.push_back("binding " + std::to_string(i) + " names unknown object '" + o + "'");
    }
    for (const auto& r : b.proxies) {
      if (!proxies.contains(r)) p.push_back("binding " + std::to_string(i) + " names unknown proxy '" + r + "'");
    }
  }

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    const std::string where = "event " + std::to_string(i) + " (" + std::string(to_string(e.type)) + ")";
    if (e.t < 0) p.push_back(where + ": negative time");
    if (e.t > s.duration) p.push_back(where + ": after the end of the run");
    auto u = users.find(e.site);
    if (u == users.end()) {
      p.push_back(where + ": unknown site '" + e.site + "'");
    } else if (u->second != e.user) {
      p.push_back(where + ": user '" + e.user + "' is not at site '" + e.site + "'");
    }
    const bool needs_object =
        e.type == EventType::grasp || e.type == EventType::release || e.type == EventType::touch;
    if (needs_object && !objects.contains(e.object)) p.push_back(where + ": unknown object '" + e.object + "'");
    if (e.type == EventType::hand_path) {
      if (e.waypoints.empty()) p.push_back(where + ": no waypoints");
      if (!(e.speed > 0.0)) p.push_back(where + ": speed must be positive");
    }
    if (e.type == EventType::gesture_injection) {
      if (e.samples.size() < 2) p.push_back(where + ": needs at least two samples");
      for (std::size_t k = 1; k < e.samples.size(); ++k) {
        if (e.samples[k].offset <= e.samples[k - 1].offset) {
          p.push_back(where + ": sample offsets must increase");
          break;
        }
      }
      if (!e.samples.empty() && e.samples.front().offset < 0) p.push_back(where + ": negative sample offset");
    }
  }

  if (p.empty()) {
    std::map<std::tuple<SiteId, UserId, int>, Millis> last;
    for (const auto& ti : expand(s)) {
      const auto& in = ti.input;
      if (in.kind != sim::InputKind::hand && in.kind != sim::InputKind::wrist) continue;
      auto [it, fresh] = last.try_emplace({in.site, in.user, static_cast<int>(in.kind)}, in.timestamp);
      if (!fresh) {
        if (in.timestamp <= it->second) {
          p.push_back("overlapping " + std::string(sim::to_string(in.kind)) + " frames for '" + in.user + "' at " +
                      std::to_string(in.timestamp) + " ms");
          break;
        }
        it->second = in.timestamp;
      }
    }
  }
  if (p.empty()) {
    try {
      sim::SimConfig cfg;
      cfg.workspace = s.workspace;
      cfg.sites = s.sites;
      sim::Simulation probe(cfg, s.objects, s.proxies, s.bindings);
    } catch (const Error& e) {
      p.push_back(e.what());
    }
  }
  return p;
}

// ------------------------------------------------------------------ expansion

namespace {

double path_length(const Pose2D& start, const std::vector<Vec2>& waypoints) {
  double len = 0.0;
  Vec2 prev = start.position();
  for (const auto& w : waypoints) {
    len += distance(prev, w);
    prev = w;
  }
  return len;
}

std::int64_t path_steps(double len, double speed, Millis interval) {
  if (len <= 0.0) return 0;
  const double step = speed * static_cast<double>(interval) / 1000.0;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(len / step - 1e-9)));
}

}  // namespace

Millis hand_path_end(Millis t, const Pose2D& start, const std::vector<Vec2>& waypoints, double speed, Millis interval) {
  return t + path_steps(path_length(start, waypoints), speed, interval) * interval;
}

std::vector<std::pair<Millis, Pose2D>> sample_hand_path(Millis t, const Pose2D& start, const std::vector<Vec2>& waypoints,
                                                        double speed, Millis interval) {
  if (!(speed > 0.0) || interval <= 0) throw ContractViolation("hand path needs positive speed and interval");
  const double len = path_length(start, waypoints);
  const std::int64_t n = path_steps(len, speed, interval);
  std::vector<std::pair<Millis, Pose2D>> out;
  out.emplace_back(t, start);
  std::size_t seg = 0;
  Vec2 a = start.position();
  double seg_start = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double s = k == n ? len : len * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 1 < waypoints.size() && seg_start + distance(a, waypoints[seg]) < s) {
      seg_start += distance(a, waypoints[seg]);
      a = waypoints[seg];
      ++seg;
    }
    const Vec2 b = waypoints[seg];
    const double l = distance(a, b);
    const Vec2 pos = k == n ? waypoints.back() : (l > 0.0 ? a + (b - a) * ((s - seg_start) / l) : b);
    out.emplace_back(t + k * interval, Pose2D(pos, start.heading()));
  }
  return out;
}

std::vector<TimedInput> expand(const ScenarioScript& s) {
  std::vector<TimedInput> out;
  std::size_t order = 0;
  auto add = [&](sim::InputKind kind, const ScriptEvent& e, const Pose2D& pose, Millis ts) {
    sim::SiteInput in;
    in.kind = kind;
    in.site = e.site;
    in.user = e.user;
    in.object = e.object;
    in.pose = pose;
    in.timestamp = ts;
    in.mode = e.mode;
    out.push_back({std::move(in), order++});
  };
  for (const auto& e : s.events) {
    switch (e.type) {
      case EventType::grasp:
        add(sim::InputKind::grasp, e, e.pose, e.t);
        break;
      case EventType::release:
        add(sim::InputKind::release, e, e.pose, e.t);
        break;
      case EventType::touch:
        add(sim::InputKind::touch, e, e.pose, e.t);
        break;
      case EventType::hand_frame:
        add(sim::InputKind::hand, e, e.pose, e.t);
        break;
      case EventType::hand_path:
        for (const auto& [ts, pose] : sample_hand_path(e.t, e.pose, e.waypoints, e.speed, s.parameters.frame_interval)) {
          add(sim::InputKind::hand, e, pose, ts);
        }
        break;
      case EventType::gesture_injection:
        for (const auto& w : e.samples) add(sim::InputKind::wrist, e, w.pose, e.t + w.offset);
        break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TimedInput& a, const TimedInput& b) {
    const auto rank = [](const sim::SiteInput& in) {
      return (in.kind == sim::InputKind::hand || in.kind == sim::InputKind::wrist) ? 0 : 1;
    };
    return std::tuple(a.input.timestamp, rank(a.input), a.order) < std::tuple(b.input.timestamp, rank(b.input), b.order);
  });
  return out;
}

}  // namespace physhare::scenario
