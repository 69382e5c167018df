#include "physhare/motion/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "physhare/core/error.hpp"
#include "physhare/core/json_codec.hpp"
#include "physhare/motion/geometry.hpp"

namespace physhare::motion {

namespace {

constexpr double kSamePoint = 1e-9;
constexpr double kSlop = 1e-9;

std::vector<Pose2D> build_waypoints(const Pose2D& start, std::span<const Vec2> points, const PlannerOptions& opts) {
  std::vector<Pose2D> out;
  double heading = start.heading();
  Vec2 cur = start.position();
  for (const Vec2& p : points) {
    if (distance(cur, p) < kSamePoint) {
      continue;
    }
    const double bearing = (p - cur).angle();
    const double forward = std::abs(heading_delta(heading, bearing));
    const double reverse = std::abs(heading_delta(heading, bearing + kPi));
    const double drive = reverse < forward - 1e-12 ? bearing + kPi : bearing;
    out.emplace_back(p, drive);
    heading = out.back().heading();
    cur = p;
  }
  if (opts.final_heading) {
    double target = *opts.final_heading;
    if (opts.final_heading_symmetric &&
        std::abs(heading_delta(heading, target + kPi)) < std::abs(heading_delta(heading, target))) {
      target += kPi;
    }
    if (std::abs(heading_delta(heading, target)) > 1e-9) {
      out.emplace_back(cur, target);
    }
  }
  return out;
}

struct Clearance {
  const RobotProxy& self;
  std::span<const PathObstacle> others;
  double margin;
  Vec2 start;

  double required(const PathObstacle& o) const { return self.profile.footprint_radius + o.radius + margin; }

  bool segment_free(Vec2 a, Vec2 b) const {
    for (const auto& o : others) {
      const double need = required(o);
      const double d = segment_polyline_distance(a, b, o.polyline);
      if (d >= need - kSlop) {
        continue;
      }
      // Already inside the clearance band at the start: only moving away is allowed.
      const double at_start = segment_polyline_distance(start, start, o.polyline);
      if (at_start < need && distance(a, start) < kSamePoint && d >= at_start - kSlop) {
        continue;
      }
      return false;
    }
    return true;
  }

  bool point_free(Vec2 p, double inflate = 0.0) const {
    for (const auto& o : others) {
      if (segment_polyline_distance(p, p, o.polyline) < required(o) + inflate - kSlop) {
        return false;
      }
    }
    return true;
  }
};

// Closest point of `poly` to segment [a, b].
Vec2 closest_point_on(std::span<const Vec2> poly, Vec2 a, Vec2 b) {
  Vec2 best = poly.front();
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](Vec2 p) {
    const double d = point_segment_distance(p, a, b);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  };
  for (const Vec2& p : poly) consider(p);
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 c = poly[i];
    const Vec2 cd = poly[i + 1] - c;
    const double len2 = cd.dot(cd);
    if (len2 == 0.0) continue;
    for (Vec2 q : {a, b}) {
      consider(c + cd * std::clamp((q - c).dot(cd) / len2, 0.0, 1.0));
    }
    const double denom = (b - a).cross(cd);
    if (denom != 0.0) {
      const double t = (c - a).cross(cd) / denom;
      const double u = (c - a).cross(b - a) / denom;
      if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) consider(a + (b - a) * t);
    }
  }
  return best;
}

std::optional<std::vector<Vec2>> single_detour(Vec2 a, Vec2 g, const Clearance& clear, const Workspace& ws) {
  const Vec2 ab = g - a;
  const double len = ab.norm();
  if (len < kSamePoint) {
    return std::nullopt;
  }
  const Vec2 dir = ab * (1.0 / len);
  const Vec2 normal = dir.perp();

  const PathObstacle* first = nullptr;
  double first_s = std::numeric_limits<double>::infinity();
  Vec2 first_c;
  for (const auto& o : clear.others) {
    if (segment_polyline_distance(a, g, o.polyline) >= clear.required(o) - kSlop) continue;
    const Vec2 c = closest_point_on(o.polyline, a, g);
    const double s = (c - a).dot(dir);
    if (s < first_s) {
      first_s = s;
      first = &o;
      first_c = c;
    }
  }
  if (first == nullptr) {
    return std::nullopt;
  }
  const Vec2 base = a + dir * std::clamp(first_s, 0.0, len);
  const double offset = (first_c - base).dot(normal);
  const double r = clear.self.profile.footprint_radius;

  std::optional<std::vector<Vec2>> best;
  double best_len = std::numeric_limits<double>::infinity();
  for (double side : {1.0, -1.0}) {
    for (int k = 0; k < 8; ++k) {
      const double h = (clear.required(*first) + 0.005) * (1.0 + 0.35 * k);
      const Vec2 w = base + normal * (offset + side * h);
      if (!ws.contains(w, r)) break;
      if (!clear.segment_free(a, w) || !clear.segment_free(w, g)) continue;
      const double total = distance(a, w) + distance(w, g);
      if (total < best_len) {
        best_len = total;
        best = std::vector<Vec2>{w, g};
      }
      break;
    }
  }
  return best;
}

std::optional<std::vector<Vec2>> grid_search(Vec2 a, Vec2 g, const Clearance& clear, const Workspace& ws) {
  const double r = clear.self.profile.footprint_radius;
  const double cell = std::max(r / 2.0, std::min(ws.width(), ws.depth()) / 200.0);
  const int nx = static_cast<int>(std::ceil(ws.width() / cell));
  const int ny = static_cast<int>(std::ceil(ws.depth() / cell));
  auto center = [&](int i, int j) { return Vec2{(i + 0.5) * cell, (j + 0.5) * cell}; };
  auto index = [&](int i, int j) { return j * nx + i; };
  auto cell_of = [&](Vec2 p) {
    return std::pair{std::clamp(static_cast<int>(p.x / cell), 0, nx - 1),
                     std::clamp(static_cast<int>(p.y / cell), 0, ny - 1)};
  };

  const double inflate = cell * 0.7072;
  std::vector<char> blocked(static_cast<std::size_t>(nx * ny), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 c = center(i, j);
      blocked[index(i, j)] = !ws.contains(c) || !clear.point_free(c, inflate);
    }
  }
  const auto [si, sj] = cell_of(a);
  const auto [gi, gj] = cell_of(g);
  blocked[index(si, sj)] = 0;
  blocked[index(gi, gj)] = 0;

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<double> cost(blocked.size(), std::numeric_limits<double>::infinity());
  std::vector<int> parent(blocked.size(), -1);
  const int start = index(si, sj);
  const int target = index(gi, gj);
  cost[start] = 0.0;
  open.emplace(distance(center(si, sj), center(gi, gj)), start);
  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    if (cur == target) break;
    const int ci = cur % nx;
    const int cj = cur / nx;
    if (f - distance(center(ci, cj), center(gi, gj)) > cost[cur] + 1e-12) continue;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = ci + di;
        const int nj = cj + dj;
        if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
        const int n = index(ni, nj);
        if (blocked[n]) continue;
        const double step = (di != 0 && dj != 0) ? cell * std::sqrt(2.0) : cell;
        if (cost[cur] + step < cost[n] - 1e-12) {
          cost[n] = cost[cur] + step;
          parent[n] = cur;
          open.emplace(cost[n] + distance(center(ni, nj), center(gi, gj)), n);
        }
      }
    }
  }
  if (!std::isfinite(cost[target])) {
    return std::nullopt;
  }
  std::vector<Vec2> raw;
  for (int c = target; c != -1; c = parent[c]) raw.push_back(center(c % nx, c / nx));
  std::reverse(raw.begin(), raw.end());
  raw.front() = a;
  raw.back() = g;

  std::vector<Vec2> out;
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !clear.segment_free(raw[i], raw[j])) --j;
    if (!clear.segment_free(raw[i], raw[j])) {
      return std::nullopt;
    }
    out.push_back(raw[j]);
    i = j;
  }
  return out;
}

}  // namespace

double travel_seconds(const Pose2D& start, std::span<const Pose2D> waypoints, const KinematicProfile& profile) {
  double seconds = 0.0;
  Pose2D cur = start;
  for (const Pose2D& w : waypoints) {
    seconds += std::abs(heading_delta(cur.heading(), w.heading())) / profile.max_angular_speed;
    seconds += distance(cur, w) / profile.max_linear_speed;
    cur = w;
  }
  return seconds;
}

PlanResult plan_path(const RobotProxy& proxy, const Pose2D& goal, std::span<const PathObstacle> others,
                     const Workspace& workspace, Millis start_time, std::optional<Millis> deadline,
                     const PlannerOptions& options) {
  if (!workspace.contains(goal, -1e-9)) {
    throw ContractViolation("goal lies outside the workspace");
  }
  if (options.tick <= 0) {
    throw ContractViolation("planner tick must be positive");
  }
  const Vec2 a = proxy.pose.position();
  const Vec2 g = goal.position();
  const Clearance clear{proxy, others, options.margin, a};

  std::optional<std::vector<Vec2>> points;
  if (distance(a, g) < kSamePoint) {
    points = std::vector<Vec2>{};
  } else if (!clear.point_free(g)) {
    return Blocked{"goal is inside another proxy's clearance"};
  } else if (clear.segment_free(a, g)) {
    points = std::vector<Vec2>{g};
  } else {
    points = single_detour(a, g, clear, workspace);
    if (!points) {
      points = grid_search(a, g, clear, workspace);
    }
  }
  if (!points) {
    return Blocked{"no collision-free route"};
  }

  MotionPlan plan;
  plan.proxy_id = proxy.id;
  plan.waypoints = build_waypoints(proxy.pose, *points, options);
  plan.start_time = start_time;
  plan.deadline = deadline;
  const double ms = travel_seconds(proxy.pose, plan.waypoints, proxy.profile) * 1000.0;
  const auto ticks = static_cast<Millis>(std::ceil(ms / static_cast<double>(options.tick) - 1e-9));
  plan.estimated_arrival = start_time + std::max<Millis>(ticks, 0) * options.tick;

  if (deadline && plan.estimated_arrival > *deadline) {
    const Millis deficit = plan.estimated_arrival - *deadline;
    plan.deadline.reset();
    return DeadlineInfeasible{std::move(plan), deficit};
  }
  return plan;
}

PathObstacle obstacle_for(const RobotProxy& proxy, const MotionPlan* plan, std::size_t next_waypoint) {
  PathObstacle o{proxy.id, {proxy.pose.position()}, proxy.profile.footprint_radius};
  if (plan != nullptr) {
    for (std::size_t i = next_waypoint; i < plan->waypoints.size(); ++i) {
      const Vec2 p = plan->waypoints[i].position();
      if (distance(p, o.polyline.back()) > kSamePoint) {
        o.polyline.push_back(p);
      }
    }
  }
  return o;
}

nlohmann::json plan_to_json(const MotionPlan& plan) {
  return {{"proxy_id", plan.proxy_id},
          {"waypoints", plan.waypoints},
          {"start_time", plan.start_time},
          {"deadline", plan.deadline ? nlohmann::json(*plan.deadline) : nlohmann::json(nullptr)},
          {"estimated_arrival", plan.estimated_arrival}};
}

}  // namespace physhare::motion
