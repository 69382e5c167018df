#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "physhare/core/types.hpp"

namespace physhare::gesture {

inline constexpr double kSpeedThreshold = 0.2;  // m/s
inline constexpr Millis kWindow = 150;
inline constexpr Millis kRefractory = 400;
/// Half-angle of the 60 degree target cone.
inline constexpr double kConeHalfAngle = kPi / 6.0;
/// Anchors within this distance of a gesture ray count as lying on it.
inline constexpr double kRayTolerance = 0.05;

/// Wrist position with the direction the hand faces as heading.
struct WristSample {
  UserId user_id;
  Pose2D pose;
  Millis timestamp = 0;

  bool operator==(const WristSample&) const = default;
};

enum class GestureKind { push, pull, slide };

std::string_view to_string(GestureKind k);
GestureKind gesture_kind_from_string(std::string_view s);

struct GestureEvent {
  UserId user_id;
  GestureKind kind = GestureKind::push;
  /// Commanded direction of object travel (unit length).
  Vec2 direction;
  /// Peak speed of the deciding velocity component.
  double magnitude = 0.0;
  Millis at = 0;
};

/// Classifies the trailing kWindow of `window` from its mean velocity relative
/// to the wrist's facing direction (taken from the last sample):
///   push  - forward component above +kSpeedThreshold
///   pull  - forward component below -kSpeedThreshold
///   slide - lateral component dominant and above kSpeedThreshold
/// The same condition must hold between every consecutive pair of samples in
/// the trailing window. Throws ContractViolation when the window is shorter
/// than kWindow and CorruptInput on non-increasing timestamps.
std::optional<GestureEvent> classify(std::span<const WristSample> window);

/// Per-user stream wrapper around classify() adding the refractory period.
class GestureRecognizer {
 public:
  std::optional<GestureEvent> feed(const WristSample& sample);
  void reset();

 private:
  std::deque<WristSample> samples_;
  std::optional<Millis> last_event_;
};

struct TargetResolution {
  ObjectId object;
  Pose2D goal;
  /// Name of the anchor the goal snapped to, if any.
  std::optional<std::string> anchor;
};

struct NoTarget {};

using Resolution = std::variant<TargetResolution, NoTarget>;

/// Turns a gesture into an object and goal. Candidates are objects inside the
/// 60 degree cone opening from the user's wrist along its facing direction.
///   push  - candidate nearest the user, sent to the farthest anchor on the
///           ray from the object along the gesture direction
///   pull  - candidate nearest the facing ray, sent to the anchor nearest the user
///   slide - candidate nearest the hand, sent to the nearest anchor ahead of it
///           along the lateral direction
/// Without anchors goals are clamped in-bounds points. An object already at
/// its farthest anchor gets its own anchor back.
Resolution resolve_target(const GestureEvent& event, const TrackedFrame& user, std::span<const VirtualObject> objects,
                          const Workspace& workspace);

}  // namespace physhare::gesture
