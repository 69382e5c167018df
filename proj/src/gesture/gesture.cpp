#include "physhare/gesture/gesture.hpp"

#include <cmath>
#include <limits>

#include "physhare/core/error.hpp"

namespace physhare::gesture {

std::string_view to_string(GestureKind k) {
  switch (k) {
    case GestureKind::push:
      return "push";
    case GestureKind::pull:
      return "pull";
    case GestureKind::slide:
      return "slide";
  }
  return "?";
}

GestureKind gesture_kind_from_string(std::string_view s) {
  if (s == "push") return GestureKind::push;
  if (s == "pull") return GestureKind::pull;
  if (s == "slide") return GestureKind::slide;
  throw ContractViolation("unknown gesture kind '" + std::string(s) + "'");
}

namespace {

struct Components {
  double forward;
  double lateral;
};

Components split(Vec2 v, Vec2 facing) { return {v.dot(facing), v.dot(facing.perp())}; }

}  // namespace

std::optional<GestureEvent> classify(std::span<const WristSample> window) {
  if (window.size() < 2) {
    throw ContractViolation("gesture window needs at least two samples");
  }
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (window[i].timestamp <= window[i - 1].timestamp) {
      throw CorruptInput("wrist samples must have strictly increasing timestamps");
    }
  }
  const WristSample& last = window.back();
  if (last.timestamp - window.front().timestamp < kWindow) {
    throw ContractViolation("gesture window must span at least 150 ms");
  }
  // Trailing sub-window: latest sample at least kWindow before the last one.
  std::size_t start = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (last.timestamp - window[i].timestamp >= kWindow) start = i;
  }

  const Vec2 facing = Vec2::from_angle(last.pose.heading());
  auto velocity = [&](std::size_t a, std::size_t b) {
    const double dt = static_cast<double>(window[b].timestamp - window[a].timestamp) / 1000.0;
    return (window[b].pose.position() - window[a].pose.position()) * (1.0 / dt);
  };
  const Components mean = split(velocity(start, window.size() - 1), facing);

  GestureEvent ev;
  ev.user_id = last.user_id;
  ev.at = last.timestamp;
  double sign = 1.0;
  if (std::abs(mean.lateral) > std::abs(mean.forward) && std::abs(mean.lateral) > kSpeedThreshold) {
    ev.kind = GestureKind::slide;
    sign = mean.lateral > 0 ? 1.0 : -1.0;
    ev.direction = facing.perp() * sign;
  } else if (mean.forward > kSpeedThreshold) {
    ev.kind = GestureKind::push;
    ev.direction = facing;
  } else if (mean.forward < -kSpeedThreshold) {
    ev.kind = GestureKind::pull;
    sign = -1.0;
    ev.direction = facing * -1.0;
  } else {
    return std::nullopt;
  }

  double peak = 0.0;
  for (std::size_t i = start; i + 1 < window.size(); ++i) {
    const Components c = split(velocity(i, i + 1), facing);
    const double along = ev.kind == GestureKind::slide ? c.lateral * sign : c.forward * sign;
    const double across = ev.kind == GestureKind::slide ? c.forward : c.lateral;
    if (along <= kSpeedThreshold) return std::nullopt;
    if (ev.kind == GestureKind::slide && std::abs(across) >= along) return std::nullopt;
    peak = std::max(peak, along);
  }
  ev.magnitude = peak;
  return ev;
}

std::optional<GestureEvent> GestureRecognizer::feed(const WristSample& sample) {
  if (!samples_.empty() && sample.timestamp <= samples_.back().timestamp) {
    throw CorruptInput("wrist samples must have strictly increasing timestamps");
  }
  samples_.push_back(sample);
  // Keep exactly one sample older than the window edge.
  while (samples_.size() > 2 && sample.timestamp - samples_[1].timestamp >= kWindow) {
    samples_.pop_front();
  }
  if (last_event_ && sample.timestamp - *last_event_ < kRefractory) {
    return std::nullopt;
  }
  if (samples_.size() < 2 || sample.timestamp - samples_.front().timestamp < kWindow) {
    return std::nullopt;
  }
  std::vector<WristSample> window(samples_.begin(), samples_.end());
  auto ev = classify(window);
  if (ev) {
    last_event_ = ev->at;
  }
  return ev;
}

void GestureRecognizer::reset() {
  samples_.clear();
  last_event_.reset();
}

namespace {

bool in_cone(Vec2 apex, Vec2 axis, Vec2 p) {
  const Vec2 rel = p - apex;
  if (rel.norm() < 1e-12) return true;
  const double cosang = rel.normalized().dot(axis);
  return cosang >= std::cos(kConeHalfAngle) - 1e-12;
}

double ray_offset(Vec2 origin, Vec2 dir, Vec2 p) {
  const Vec2 rel = p - origin;
  if (rel.dot(dir) < 0.0) return rel.norm();
  return std::abs(rel.cross(dir));
}

// Anchors on the ray from `origin` along `dir`, as (anchor, distance along).
std::vector<std::pair<const Anchor*, double>> anchors_on_ray(const Workspace& ws, Vec2 origin, Vec2 dir) {
  std::vector<std::pair<const Anchor*, double>> out;
  for (const auto& a : ws.anchors()) {
    const Vec2 rel = a.pose.position() - origin;
    const double along = rel.dot(dir);
    if (along >= -kRayTolerance && std::abs(rel.cross(dir)) <= kRayTolerance) {
      out.emplace_back(&a, along);
    }
  }
  return out;
}

const Anchor* nearest_anchor(const Workspace& ws, Vec2 p) {
  const Anchor* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& a : ws.anchors()) {
    const double d = distance(a.pose.position(), p);
    if (d < best_d) {
      best_d = d;
      best = &a;
    }
  }
  return best;
}

// Farthest in-bounds point from `origin` along `dir`.
Vec2 ray_exit(const Workspace& ws, Vec2 origin, Vec2 dir) {
  double t = std::numeric_limits<double>::infinity();
  if (dir.x > 0) t = std::min(t, (ws.width() - origin.x) / dir.x);
  if (dir.x < 0) t = std::min(t, -origin.x / dir.x);
  if (dir.y > 0) t = std::min(t, (ws.depth() - origin.y) / dir.y);
  if (dir.y < 0) t = std::min(t, -origin.y / dir.y);
  if (!std::isfinite(t)) t = 0.0;
  return ws.clamp(origin + dir * std::max(t, 0.0));
}

TargetResolution snapped(const VirtualObject& o, const Anchor* a, Vec2 fallback) {
  if (a != nullptr) {
    return {o.id, a->pose.with_heading(o.pose.heading()), a->name};
  }
  return {o.id, Pose2D(fallback, o.pose.heading()), std::nullopt};
}

}  // namespace

Resolution resolve_target(const GestureEvent& event, const TrackedFrame& user, std::span<const VirtualObject> objects,
                          const Workspace& workspace) {
  if (objects.empty()) {
    throw ContractViolation("resolve_target needs at least one object");
  }
  const Vec2 apex = user.pose.position();
  const Vec2 axis = Vec2::from_angle(user.pose.heading());
  std::vector<const VirtualObject*> cone;
  for (const auto& o : objects) {
    if (in_cone(apex, axis, o.pose.position())) cone.push_back(&o);
  }
  if (cone.empty()) {
    return NoTarget{};
  }
  auto pick = [&](auto&& score) {
    const VirtualObject* best = nullptr;
    double best_s = std::numeric_limits<double>::infinity();
    for (const auto* o : cone) {
      const double s = score(*o);
      if (s < best_s || (s == best_s && o->id < best->id)) {
        best = o;
        best_s = s;
      }
    }
    return best;
  };

  const Vec2 dir = event.direction.normalized();
  switch (event.kind) {
    case GestureKind::push: {
      const VirtualObject* o = pick([&](const VirtualObject& v) { return distance(v.pose.position(), apex); });
      const Vec2 from = o->pose.position();
      if (workspace.anchors().empty()) {
        return snapped(*o, nullptr, ray_exit(workspace, from, dir));
      }
      const Anchor* best = nullptr;
      double best_along = -std::numeric_limits<double>::infinity();
      for (const auto& [a, along] : anchors_on_ray(workspace, from, dir)) {
        if (along > best_along) {
          best = a;
          best_along = along;
        }
      }
      if (best == nullptr) best = nearest_anchor(workspace, from);
      return snapped(*o, best, from);
    }
    case GestureKind::pull: {
      const VirtualObject* o = pick([&](const VirtualObject& v) { return ray_offset(apex, axis, v.pose.position()); });
      if (workspace.anchors().empty()) {
        return snapped(*o, nullptr, workspace.clamp(apex));
      }
      return snapped(*o, nearest_anchor(workspace, apex), apex);
    }
    case GestureKind::slide: {
      const VirtualObject* o = pick([&](const VirtualObject& v) { return distance(v.pose.position(), apex); });
      const Vec2 from = o->pose.position();
      if (workspace.anchors().empty()) {
        return snapped(*o, nullptr, workspace.clamp(from + dir * 0.3));
      }
      const Anchor* best = nullptr;
      double best_along = std::numeric_limits<double>::infinity();
      for (const auto& [a, along] : anchors_on_ray(workspace, from, dir)) {
        if (along > kRayTolerance && along < best_along) {
          best = a;
          best_along = along;
        }
      }
      if (best == nullptr) best = nearest_anchor(workspace, from);
      return snapped(*o, best, from);
    }
  }
  return NoTarget{};
}

}  // namespace physhare::gesture
