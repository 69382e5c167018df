#include "physhare/scenario/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace physhare::scenario {

namespace {

constexpr Millis kStart = 500;

Millis round_up(Millis v, Millis step) { return (v + step - 1) / step * step; }

Millis seconds_to_ms(double s) { return static_cast<Millis>(std::ceil(s * 1000.0 - 1e-9)); }

Workspace tile_table(double size) {
  const double pitch = size / 3.0;
  std::vector<Anchor> anchors;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      anchors.push_back({"tile-" + std::to_string(row * 3 + col + 1),
                         Pose2D(pitch / 2.0 + pitch * col, pitch / 2.0 + pitch * row)});
    }
  }
  return {WorkspaceKind::tabletop, size, size, std::move(anchors)};
}

Vec2 tile_center(const Workspace& w, int tile) { return w.anchors().at(static_cast<std::size_t>(tile - 1)).pose.position(); }

KinematicProfile tabletop_profile(const Parameters& p) {
  auto k = KinematicProfile::tabletop();
  if (p.robot_speed) k.max_linear_speed = *p.robot_speed;
  return k;
}

SiteFrame frame_for(const ScenarioScript& s, const sim::SiteConfig& site) {
  return {site.mirrored, s.workspace.width(), s.workspace.depth()};
}

ScriptEvent action(EventType type, Millis t, const sim::SiteConfig& site, const ObjectId& object = {}) {
  ScriptEvent e;
  e.type = type;
  e.t = t;
  e.site = site.id;
  e.user = site.user;
  e.object = object;
  return e;
}

ScriptEvent hand_path(Millis t, const sim::SiteConfig& site, const Pose2D& from, std::vector<Vec2> waypoints, double speed) {
  ScriptEvent e = action(EventType::hand_path, t, site);
  e.pose = from;
  e.waypoints = std::move(waypoints);
  e.speed = speed;
  return e;
}

void two_sites(ScenarioScript& s) {
  s.sites = {{"a", "user-a", false, s.parameters.artificial_latency},
             {"b", "user-b", true, s.parameters.artificial_latency}};
}

// ------------------------------------------------------------------ tictactoe

ScenarioScript tictactoe(const Parameters& p) {
  ScenarioScript s;
  s.name = "tictactoe";
  s.parameters = p;
  s.workspace = tile_table(p.table_size.value_or(0.9));
  two_sites(s);
  const auto& a = s.sites[0];
  const auto& b = s.sites[1];
  const Pose2D start(tile_center(s.workspace, 1), 0.0);
  s.objects = {{"controller", start, std::nullopt, VisualKind::controller, 0.0}};
  const auto profile = tabletop_profile(p);
  s.proxies = {{"pa", a.id, profile, frame_for(s, a).to_local(start), ProxyState::idle, std::nullopt},
               {"pb", b.id, profile, frame_for(s, b).to_local(start), ProxyState::idle, std::nullopt}};
  s.bindings = {{BindingKind::many_to_one, {"controller"}, {"pa", "pb"}}};

  auto tour = tile_tour();
  const auto moves = static_cast<std::size_t>(p.extra.value("moves", static_cast<int>(tour.size())));
  if (moves < tour.size()) tour.resize(moves);
  const Millis settle = tictactoe_settle(p);
  Millis t = kStart;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const auto& site = s.sites[i % 2];
    const SiteFrame f = frame_for(s, site);
    const Pose2D from = f.to_local(Pose2D(tile_center(s.workspace, tour[i].first))).with_heading(0.0);
    const Vec2 to = f.to_local(Pose2D(tile_center(s.workspace, tour[i].second))).position();
    ScriptEvent g = action(EventType::grasp, t, site, "controller");
    g.pose = from;
    s.events.push_back(g);
    Millis end = t;
    if (tour[i].first != tour[i].second) {
      s.events.push_back(hand_path(t, site, from, {to}, p.hand_speed));
      end = hand_path_end(t, from, {to}, p.hand_speed, p.frame_interval);
    }
    s.events.push_back(action(EventType::release, end, site, "controller"));
    t = end + p.artificial_latency + settle;
  }
  s.duration = t;
  return s;
}

// ------------------------------------------------------------------ clink-mugs

ScenarioScript clink_mugs(const Parameters& p) {
  ScenarioScript s;
  s.name = "clink-mugs";
  s.parameters = p;
  const double size = p.table_size.value_or(0.9);
  s.workspace = Workspace(WorkspaceKind::tabletop, size, size);
  two_sites(s);
  const Vec2 center{size / 2.0, size / 2.0};
  s.objects = {{"mug", Pose2D(center), std::nullopt, VisualKind::mug, 0.0}};
  const auto profile = tabletop_profile(p);
  for (const auto& site : s.sites) {
    s.proxies.push_back({"p" + site.id, site.id, profile, frame_for(s, site).to_local(Pose2D(center)), ProxyState::idle,
                         std::nullopt});
  }
  s.bindings = {{BindingKind::many_to_one, {"mug"}, {"pa", "pb"}}};

  std::mt19937_64 rng(p.seed);
  const int races = p.extra.value("races", 100);
  const Millis spread = p.extra.value("race_spread", 8);
  const double reach = p.extra.value("strike", 0.1);
  std::uniform_int_distribution<Millis> offset(-spread, spread);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const Millis transit = p.relay_delay + p.relay_jitter;
  Vec2 mug = center;
  Millis t = kStart;
  for (int r = 0; r < races; ++r) {
    const Millis d = offset(rng);
    const Millis ta = t + std::max<Millis>(d, 0);
    const Millis tb = t + std::max<Millis>(-d, 0);
    const auto& winner = ta <= tb ? s.sites[0] : s.sites[1];
    const auto& loser = ta <= tb ? s.sites[1] : s.sites[0];
    for (const auto* site : {&s.sites[0], &s.sites[1]}) {
      ScriptEvent g = action(EventType::grasp, site == &s.sites[0] ? ta : tb, *site, "mug");
      g.pose = frame_for(s, *site).to_local(Pose2D(mug));
      s.events.push_back(g);
    }
    const Vec2 target = center + Vec2::from_angle(angle(rng)) * reach;
    const SiteFrame wf = frame_for(s, winner);
    const Pose2D from = wf.to_local(Pose2D(mug)).with_heading(0.0);
    const Vec2 to = wf.to_local(Pose2D(target)).position();
    const Millis strike = round_up(std::max(ta, tb) + transit + 20, p.frame_interval);
    s.events.push_back(hand_path(strike, winner, from, {to}, p.hand_speed));
    const Millis end = hand_path_end(strike, from, {to}, p.hand_speed, p.frame_interval);
    s.events.push_back(action(EventType::release, end, winner, "mug"));
    s.events.push_back(action(EventType::release, end + p.frame_interval, loser, "mug"));
    mug = target;
    t = end + p.artificial_latency + transit + 1500;
  }
  s.duration = t;
  return s;
}

// ------------------------------------------------------------------ telekinesis

struct Expected {
  gesture::GestureKind kind;
  int goal_tile;
  double lateral;  // slide direction along +x (local), 0 otherwise
};

// Gesture used at each tile and where it should send the mug: the far row is
// pulled toward the user, the middle row pushed away, the near row slid along.
Expected telekinesis_expectation(int tile) {
  const int row = (tile - 1) / 3;
  const int col = (tile - 1) % 3;
  if (row == 0) return {gesture::GestureKind::pull, 6 + col + 1, 0.0};
  if (row == 1) return {gesture::GestureKind::push, col + 1, 0.0};
  return col < 2 ? Expected{gesture::GestureKind::slide, tile + 1, 1.0} : Expected{gesture::GestureKind::slide, tile - 1, -1.0};
}

std::vector<WristPoint> wrist_motion(Vec2 start, Vec2 velocity, Millis rest, Millis moving) {
  std::vector<WristPoint> out;
  const Pose2D still(start, -kPi / 2.0);
  for (Millis o = 0; o < rest; o += 10) out.push_back({o, still});
  for (Millis o = 0; o <= moving; o += 10) {
    out.push_back({rest + o, Pose2D(start + velocity * (static_cast<double>(o) / 1000.0), -kPi / 2.0)});
  }
  return out;
}

ScenarioScript telekinesis(const Parameters& p) {
  ScenarioScript s;
  s.name = "telekinesis";
  s.parameters = p;
  const double size = p.table_size.value_or(0.9);
  s.workspace = tile_table(size);
  s.sites = {{"a", "user-a", false, p.artificial_latency}};
  const auto& site = s.sites[0];
  const auto profile = tabletop_profile(p);
  Vec2 mug = tile_center(s.workspace, 5);
  s.objects = {{"mug", Pose2D(mug), std::nullopt, VisualKind::mug, 0.0}};
  s.proxies = {{"p1", site.id, profile, Pose2D(mug), ProxyState::idle, std::nullopt}};
  s.bindings = {{BindingKind::one_to_one, {"mug"}, {"p1"}}};

  const double wrist_speed = p.extra.value("wrist_speed", 0.35);
  const double user_y = size + 0.05;
  auto travel = [&](double d) {
    return round_up(seconds_to_ms(d / profile.max_linear_speed + kPi / profile.max_angular_speed) + 800, 10);
  };
  Millis t = kStart;
  for (int tile = 1; tile <= 9; ++tile) {
    const Vec2 target = tile_center(s.workspace, tile);
    if (distance(mug, target) > 1e-9) {
      ScriptEvent g = action(EventType::grasp, t, site, "mug");
      g.mode = sim::GraspMode::virtual_grasp;
      g.pose = Pose2D(mug);
      s.events.push_back(g);
      s.events.push_back(hand_path(t, site, Pose2D(mug), {target}, p.hand_speed));
      const Millis end = hand_path_end(t, Pose2D(mug), {target}, p.hand_speed, p.frame_interval);
      s.events.push_back(action(EventType::release, end, site, "mug"));
      t = end + travel(distance(mug, target));
      mug = target;
    }
    const Expected x = telekinesis_expectation(tile);
    Vec2 velocity{0.0, 0.0};
    switch (x.kind) {
      case gesture::GestureKind::push:
        velocity = {0.0, -wrist_speed};
        break;
      case gesture::GestureKind::pull:
        velocity = {0.0, wrist_speed};
        break;
      case gesture::GestureKind::slide:
        velocity = {x.lateral * wrist_speed, 0.0};
        break;
    }
    ScriptEvent inj = action(EventType::gesture_injection, t, site);
    inj.samples = wrist_motion({mug.x, user_y}, velocity, 60, 250);
    inj.expect = GestureExpectation{x.kind, "mug", "tile-" + std::to_string(x.goal_tile)};
    s.events.push_back(inj);
    const Vec2 goal = tile_center(s.workspace, x.goal_tile);
    t += inj.samples.back().offset + travel(distance(mug, goal));
    mug = goal;
  }
  s.duration = t + 1000;
  return s;
}

// ------------------------------------------------------------------ city-builder

ScenarioScript city_builder(const Parameters& p) {
  ScenarioScript s;
  s.name = "city-builder";
  s.parameters = p;
  const double size = p.table_size.value_or(0.9);
  s.workspace = Workspace(WorkspaceKind::tabletop, size, size);
  s.sites = {{"a", "user-a", false, p.artificial_latency}};
  const auto& site = s.sites[0];
  const auto profile = tabletop_profile(p);
  const double u = size / 0.9;
  const std::vector<Vec2> spots = {{0.15 * u, 0.15 * u}, {0.45 * u, 0.15 * u}, {0.75 * u, 0.15 * u},
                                   {0.15 * u, 0.50 * u}, {0.45 * u, 0.50 * u}, {0.75 * u, 0.50 * u}};
  std::vector<ObjectId> ids;
  for (std::size_t i = 0; i < spots.size(); ++i) {
    ids.push_back("building-" + std::to_string(i + 1));
    s.objects.push_back({ids.back(), Pose2D(spots[i]), std::nullopt, VisualKind::building, 0.0});
  }
  s.proxies = {{"p1", site.id, profile, Pose2D(0.25 * u, 0.80 * u), ProxyState::idle, std::nullopt},
               {"p2", site.id, profile, Pose2D(0.65 * u, 0.80 * u), ProxyState::idle, std::nullopt}};
  s.bindings = {{BindingKind::one_to_many, ids, {"p1", "p2"}}};

  std::mt19937_64 rng(p.seed);
  const int visits = p.extra.value("visits", 12);
  std::uniform_int_distribution<std::size_t> pick(0, spots.size() - 1);
  const Millis dwell = round_up(seconds_to_ms(size * std::sqrt(2.0) / profile.max_linear_speed +
                                              kPi / profile.max_angular_speed) + 1000, 10);
  Vec2 hand{0.45 * u, 0.85 * u};
  ScriptEvent first = action(EventType::hand_frame, kStart, site);
  first.pose = Pose2D(hand);
  s.events.push_back(first);
  Millis t = kStart + 1000;
  std::size_t last = spots.size();
  for (int v = 0; v < visits; ++v) {
    std::size_t k = pick(rng);
    while (k == last) k = pick(rng);
    last = k;
    s.events.push_back(hand_path(t, site, Pose2D(hand), {spots[k]}, p.hand_speed));
    const Millis end = hand_path_end(t, Pose2D(hand), {spots[k]}, p.hand_speed, p.frame_interval);
    hand = spots[k];
    ScriptEvent touch = action(EventType::touch, end + dwell, site, ids[k]);
    touch.pose = Pose2D(hand);
    s.events.push_back(touch);
    t = end + dwell + 500;
  }
  s.duration = t + 500;
  return s;
}

// ------------------------------------------------------------------ wall-push

ScenarioScript wall_push(const Parameters& p) {
  ScenarioScript s;
  s.name = "wall-push";
  s.parameters = p;
  const double size = p.table_size.value_or(4.0);
  s.workspace = Workspace(WorkspaceKind::floor, size, size);
  s.sites = {{"a", "user-a", false, p.artificial_latency}};
  const auto& site = s.sites[0];
  auto profile = KinematicProfile::floor();
  if (p.robot_speed) profile.max_linear_speed = *p.robot_speed;
  const double u = size / 4.0;
  const double wall_y = 3.2 * u;
  s.objects = {{"wall", Pose2D(2.0 * u, wall_y, 0.0), std::nullopt, VisualKind::wall, 3.5 * u}};
  s.proxies = {{"w1", site.id, profile, Pose2D(1.0 * u, wall_y, 0.0), ProxyState::idle, std::nullopt}};
  s.bindings = {{BindingKind::one_to_many, {"wall"}, {"w1"}}};

  const double hand_y = wall_y - 0.2 * u;
  const std::vector<double> stops = {1.0, 2.6, 0.6, 3.4, 2.0};
  Vec2 hand{1.0 * u, hand_y};
  ScriptEvent first = action(EventType::hand_frame, kStart, site);
  first.pose = Pose2D(hand);
  s.events.push_back(first);
  Millis t = kStart + 500;
  for (double x : stops) {
    const Vec2 next{x * u, hand_y};
    Millis end = t;
    if (distance(hand, next) > 1e-9) {
      s.events.push_back(hand_path(t, site, Pose2D(hand), {next}, p.hand_speed));
      end = hand_path_end(t, Pose2D(hand), {next}, p.hand_speed, p.frame_interval);
    }
    const Millis lag = std::max<Millis>(
        0, seconds_to_ms(distance(hand, next) * (1.0 / profile.max_linear_speed - 1.0 / p.hand_speed)));
    hand = next;
    ScriptEvent touch = action(EventType::touch, round_up(end + lag + 1500, 10), site, "wall");
    touch.pose = Pose2D(hand);
    s.events.push_back(touch);
    t = touch.t + 500;
  }
  s.duration = t + 500;
  return s;
}

}  // namespace

// ------------------------------------------------------------------ public

std::vector<std::pair<int, int>> tile_tour() {
  // Hierholzer on the complete digraph over tiles 1..9 with self-loops.
  std::array<int, 10> next{};
  next.fill(1);
  std::vector<int> stack = {1};
  std::vector<int> circuit;
  while (!stack.empty()) {
    const int v = stack.back();
    if (next[static_cast<std::size_t>(v)] <= 9) {
      stack.push_back(next[static_cast<std::size_t>(v)]++);
    } else {
      circuit.push_back(v);
      stack.pop_back();
    }
  }
  std::reverse(circuit.begin(), circuit.end());
  std::vector<std::pair<int, int>> moves;
  for (std::size_t i = 0; i + 1 < circuit.size(); ++i) moves.emplace_back(circuit[i], circuit[i + 1]);
  return moves;
}

Millis tictactoe_settle(const Parameters& p) {
  const auto profile = tabletop_profile(p);
  const double diagonal = p.table_size.value_or(0.9) * std::sqrt(2.0) * 2.0 / 3.0;
  const double lag = kPi / 2.0 / profile.max_angular_speed +
                     diagonal * (1.0 / profile.max_linear_speed - 1.0 / p.hand_speed);
  return round_up(std::max<Millis>(1200, seconds_to_ms(std::max(lag, 0.0)) + 200), 10);
}

Parameters default_parameters(std::string_view scenario) {
  Parameters p;
  if (scenario == "clink-mugs") {
    p.relay_delay = 20;
    p.relay_jitter = 15;
  }
  if (std::find(kScenarioNames.begin(), kScenarioNames.end(), scenario) == kScenarioNames.end()) {
    throw ContractViolation("unknown scenario '" + std::string(scenario) + "'");
  }
  return p;
}

Parameters with_parameter(Parameters p, std::string_view name, double value) {
  auto as_ms = [&](std::string_view what) {
    if (value != std::floor(value) || value < 0) {
      throw ContractViolation(std::string(what) + " must be a non-negative whole number of milliseconds");
    }
    return static_cast<Millis>(value);
  };
  if (name == "artificial_latency") {
    p.artificial_latency = as_ms(name);
  } else if (name == "robot_speed") {
    if (!(value > 0.0)) throw ContractViolation("robot_speed must be positive");
    p.robot_speed = value;
  } else if (name == "hand_speed") {
    if (!(value > 0.0)) throw ContractViolation("hand_speed must be positive");
    p.hand_speed = value;
  } else if (name == "table_size") {
    if (!(value > 0.0)) throw ContractViolation("table_size must be positive");
    p.table_size = value;
  } else if (name == "seed") {
    p.seed = static_cast<std::uint64_t>(as_ms(name));
  } else if (name == "relay_delay") {
    p.relay_delay = as_ms(name);
  } else if (name == "relay_jitter") {
    p.relay_jitter = as_ms(name);
  } else if (name == "frame_interval") {
    p.frame_interval = as_ms(name);
    if (p.frame_interval == 0) throw ContractViolation("frame_interval must be positive");
  } else {
    throw ContractViolation("unknown sweep parameter '" + std::string(name) + "'");
  }
  return p;
}

ScenarioScript build_script(std::string_view scenario, const Parameters& params) {
  ScenarioScript s;
  if (scenario == "tictactoe") {
    s = tictactoe(params);
  } else if (scenario == "clink-mugs") {
    s = clink_mugs(params);
  } else if (scenario == "telekinesis") {
    s = telekinesis(params);
  } else if (scenario == "city-builder") {
    s = city_builder(params);
  } else if (scenario == "wall-push") {
    s = wall_push(params);
  } else {
    throw ContractViolation("unknown scenario '" + std::string(scenario) + "'");
  }
  if (auto problems = validate(s); !problems.empty()) throw ScriptError(std::move(problems));
  return s;
}

}  // namespace physhare::scenario
