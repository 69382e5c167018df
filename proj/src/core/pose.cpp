#include "physhare/core/pose.hpp"

#include <stdexcept>

namespace physhare {

double normalize_heading(double radians) {
  if (!std::isfinite(radians)) {
    throw std::invalid_argument("heading must be finite");
  }
  double h = std::remainder(radians, kTwoPi);
  if (h <= -kPi) {
    h += kTwoPi;
  }
  return h;
}

double heading_delta(double from, double to) { return normalize_heading(to - from); }

Vec2 Vec2::normalized() const {
  const double n = norm();
  if (n == 0.0) {
    return {};
  }
  return {x / n, y / n};
}

double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

Pose2D::Pose2D(double x, double y, double heading) : x_(x), y_(y), heading_(normalize_heading(heading)) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::invalid_argument("pose position must be finite");
  }
  // Keep the canonical form free of negative zero.
  if (x_ == 0.0) x_ = 0.0;
  if (y_ == 0.0) y_ = 0.0;
  if (heading_ == 0.0) heading_ = 0.0;
}

double distance(const Pose2D& a, const Pose2D& b) { return distance(a.position(), b.position()); }

}  // namespace physhare
