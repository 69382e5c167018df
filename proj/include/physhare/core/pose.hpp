#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace physhare {

/// Session-relative time in milliseconds.
using Millis = std::int64_t;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
double normalize_heading(double radians);

/// Smallest signed rotation taking `from` onto `to`, in (-pi, pi].
double heading_delta(double from, double to);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  /// Unit vector, or zero if this vector has no length.
  Vec2 normalized() const;
  /// Rotated by +90 degrees (left of this vector).
  Vec2 perp() const { return {-y, x}; }
  double angle() const { return std::atan2(y, x); }

  static Vec2 from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }
};

double distance(Vec2 a, Vec2 b);

/// Planar position plus heading. Position must be finite and heading is kept
/// in (-pi, pi].
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double heading = 0.0);
  Pose2D(Vec2 position, double heading = 0.0) : Pose2D(position.x, position.y, heading) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double heading() const { return heading_; }
  Vec2 position() const { return {x_, y_}; }

  Pose2D with_position(Vec2 p) const { return {p, heading_}; }
  Pose2D with_heading(double h) const { return {x_, y_, h}; }

  bool operator==(const Pose2D&) const = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double heading_ = 0.0;
};

/// Euclidean distance over (x, y); heading is ignored.
double distance(const Pose2D& a, const Pose2D& b);

}  // namespace physhare
