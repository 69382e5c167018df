#pragma once

#include <span>

#include "physhare/core/pose.hpp"

namespace physhare::motion {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
/// Distance from segment [a, b] to a polyline; a single-point polyline is a point.
double segment_polyline_distance(Vec2 a, Vec2 b, std::span<const Vec2> polyline);
double polyline_length(std::span<const Vec2> points);

}  // namespace physhare::motion
