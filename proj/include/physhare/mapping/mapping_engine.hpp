#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "physhare/core/error.hpp"
#include "physhare/core/types.hpp"
#include "physhare/core/world_state.hpp"

namespace physhare::mapping {

class BindingError : public Error {
 public:
  using Error::Error;
};

/// A new focus must be this much closer than the current one to take over.
inline constexpr double kFocusHysteresis = 0.05;

/// Distances closer than this count as equal when choosing a proxy.
inline constexpr double kTieTolerance = 1e-9;

/// Proxy nearest to `focus`; equal distances (within kTieTolerance) go to the
/// lexicographically smallest id. Empty input yields nullopt.
std::optional<ProxyId> nearest_proxy(std::span<const RobotProxy> candidates, Vec2 focus);

/// Object nearest the hand, holding on to `current` unless another object is
/// more than `hysteresis` closer. Precondition: `objects` is non-empty.
ObjectId hand_focus(std::span<const VirtualObject> objects, const TrackedFrame& hand,
                    const std::optional<ObjectId>& current = std::nullopt, double hysteresis = kFocusHysteresis);

struct Dispatch {
  ProxyId proxy;
  /// Previously active proxy that was let go, when it differs from `proxy`.
  std::optional<ProxyId> released;
};

/// No proxy of the pool is available at the requested site.
struct Unserviceable {
  std::string binding_id;
  SiteId site;
};

using DispatchResult = std::variant<Dispatch, Unserviceable>;

struct GraspDecision {
  Authority winner;
  /// The contender that lost, when two grasps overlapped.
  std::optional<Authority> loser;
  bool requester_won = false;
};

/// Binding table for virtual-object/proxy associations, mutated only by the
/// simulation writer.
class MappingEngine {
 public:
  const MappingBinding& bind_one_to_one(const WorldState& world, const ObjectId& object, const ProxyId& proxy);
  const MappingBinding& bind_one_to_many(const WorldState& world, std::vector<ObjectId> objects,
                                         std::vector<ProxyId> pool);
  const MappingBinding& bind_many_to_one(const WorldState& world, const ObjectId& object,
                                         std::vector<ProxyId> proxies);
  void unbind(const std::string& binding_id);

  /// Picks the pool proxy at `site` nearest `focus` (carried proxies are not
  /// eligible), makes it the site's active proxy for `focus_object` and
  /// releases the previous one.
  DispatchResult dispatch_nearest(const std::string& binding_id, Vec2 focus, const SiteId& site,
                                  const std::map<ProxyId, RobotProxy>& proxies, const ObjectId& focus_object);

  /// Grasp arbitration: the earliest grasp timestamp holds the object; exact
  /// ties go to the smaller site id, then the smaller user id.
  GraspDecision grasp(const ObjectId& object, const Authority& request);
  /// Clears the hold if `user` is the holder and returns the old authority.
  std::optional<Authority> release(const ObjectId& object, const UserId& user);
  std::optional<Authority> holder(const ObjectId& object) const;

  const MappingBinding* find(const std::string& binding_id) const;
  const MappingBinding* binding_for_object(const ObjectId& object) const;
  const MappingBinding* binding_for_proxy(const ProxyId& proxy) const;
  const std::map<std::string, MappingBinding>& bindings() const { return bindings_; }

 private:
  MappingBinding& insert(MappingBinding binding);
  void require_object_unbound(const WorldState& world, const ObjectId& object) const;
  void require_proxy_unbound(const WorldState& world, const ProxyId& proxy) const;
  void sync_authority(const ObjectId& object);

  std::map<std::string, MappingBinding> bindings_;
  std::map<ObjectId, Authority> holds_;
  int next_id_ = 1;
};

}  // namespace physhare::mapping
