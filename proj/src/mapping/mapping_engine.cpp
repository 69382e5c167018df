#include "physhare/mapping/mapping_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace physhare::mapping {

std::optional<ProxyId> nearest_proxy(std::span<const RobotProxy> candidates, Vec2 focus) {
  const RobotProxy* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& p : candidates) {
    const double d = distance(p.pose.position(), focus);
    if (best == nullptr || d < best_d - kTieTolerance || (std::abs(d - best_d) <= kTieTolerance && p.id < best->id)) {
      best = &p;
      best_d = d;
    }
  }
  if (best == nullptr) {
    return std::nullopt;
  }
  return best->id;
}

ObjectId hand_focus(std::span<const VirtualObject> objects, const TrackedFrame& hand,
                    const std::optional<ObjectId>& current, double hysteresis) {
  if (objects.empty()) {
    throw ContractViolation("hand_focus needs at least one object");
  }
  const Vec2 h = hand.pose.position();
  const VirtualObject* nearest = nullptr;
  double nearest_d = 0.0;
  const VirtualObject* held = nullptr;
  for (const auto& o : objects) {
    const double d = distance(o.pose.position(), h);
    if (nearest == nullptr || d < nearest_d || (d == nearest_d && o.id < nearest->id)) {
      nearest = &o;
      nearest_d = d;
    }
    if (current && o.id == *current) {
      held = &o;
    }
  }
  if (held != nullptr && held != nearest) {
    const double held_d = distance(held->pose.position(), h);
    if (held_d - nearest_d <= hysteresis) {
      return held->id;
    }
  }
  return nearest->id;
}

MappingBinding& MappingEngine::insert(MappingBinding binding) {
  binding.id = "binding-" + std::to_string(next_id_++);
  std::sort(binding.virtual_ids.begin(), binding.virtual_ids.end());
  std::sort(binding.proxies.begin(), binding.proxies.end());
  auto [it, inserted] = bindings_.emplace(binding.id, std::move(binding));
  return it->second;
}

void MappingEngine::require_object_unbound(const WorldState& world, const ObjectId& object) const {
  if (!world.objects.contains(object)) {
    throw BindingError("unknown virtual object '" + object + "'");
  }
  if (binding_for_object(object) != nullptr) {
    throw BindingError("virtual object '" + object + "' is already bound");
  }
}

void MappingEngine::require_proxy_unbound(const WorldState& world, const ProxyId& proxy) const {
  if (!world.proxies.contains(proxy)) {
    throw BindingError("unknown proxy '" + proxy + "'");
  }
  if (binding_for_proxy(proxy) != nullptr) {
    throw BindingError("proxy '" + proxy + "' is already bound");
  }
}

const MappingBinding& MappingEngine::bind_one_to_one(const WorldState& world, const ObjectId& object,
                                                     const ProxyId& proxy) {
  require_object_unbound(world, object);
  require_proxy_unbound(world, proxy);
  MappingBinding b;
  b.kind = BindingKind::one_to_one;
  b.virtual_ids = {object};
  const auto& p = world.proxies.at(proxy);
  b.proxies = {{proxy, p.site}};
  b.active[p.site] = proxy;
  b.focus[p.site] = object;
  auto& stored = insert(std::move(b));
  sync_authority(object);
  return stored;
}

const MappingBinding& MappingEngine::bind_one_to_many(const WorldState& world, std::vector<ObjectId> objects,
                                                      std::vector<ProxyId> pool) {
  if (objects.empty() || pool.empty()) {
    throw BindingError("one-to-many binding needs objects and a proxy pool");
  }
  std::set<ObjectId> seen_objects;
  for (const auto& o : objects) {
    require_object_unbound(world, o);
    if (!seen_objects.insert(o).second) throw BindingError("duplicate object '" + o + "'");
  }
  std::set<ProxyId> seen_proxies;
  MappingBinding b;
  b.kind = BindingKind::one_to_many;
  for (const auto& p : pool) {
    require_proxy_unbound(world, p);
    if (!seen_proxies.insert(p).second) throw BindingError("duplicate proxy '" + p + "'");
    b.proxies.push_back({p, world.proxies.at(p).site});
  }
  b.virtual_ids = std::move(objects);
  return insert(std::move(b));
}

const MappingBinding& MappingEngine::bind_many_to_one(const WorldState& world, const ObjectId& object,
                                                      std::vector<ProxyId> proxies) {
  require_object_unbound(world, object);
  if (proxies.size() < 2) {
    throw BindingError("many-to-one binding needs at least two proxies");
  }
  std::set<SiteId> sites;
  MappingBinding b;
  b.kind = BindingKind::many_to_one;
  b.virtual_ids = {object};
  for (const auto& p : proxies) {
    require_proxy_unbound(world, p);
    const auto& site = world.proxies.at(p).site;
    if (!sites.insert(site).second) {
      throw BindingError("many-to-one proxies must be at distinct sites (site '" + site + "' repeated)");
    }
    b.proxies.push_back({p, site});
    b.active[site] = p;
    b.focus[site] = object;
  }
  auto& stored = insert(std::move(b));
  sync_authority(object);
  return stored;
}

void MappingEngine::unbind(const std::string& binding_id) { bindings_.erase(binding_id); }

DispatchResult MappingEngine::dispatch_nearest(const std::string& binding_id, Vec2 focus, const SiteId& site,
                                               const std::map<ProxyId, RobotProxy>& proxies,
                                               const ObjectId& focus_object) {
  auto it = bindings_.find(binding_id);
  if (it == bindings_.end()) {
    throw BindingError("unknown binding '" + binding_id + "'");
  }
  MappingBinding& b = it->second;
  std::vector<RobotProxy> candidates;
  for (const auto& ref : b.proxies) {
    if (ref.site != site) continue;
    auto p = proxies.find(ref.proxy);
    if (p == proxies.end() || p->second.carried_by) continue;
    candidates.push_back(p->second);
  }
  const auto chosen = nearest_proxy(candidates, focus);
  if (!chosen) {
    return Unserviceable{binding_id, site};
  }
  Dispatch d{*chosen, std::nullopt};
  auto prev = b.active.find(site);
  if (prev != b.active.end() && prev->second != *chosen) {
    d.released = prev->second;
  }
  b.active[site] = *chosen;
  b.focus[site] = focus_object;
  return d;
}

namespace {

bool earlier(const Authority& a, const Authority& b) {
  return std::tie(a.grasped_at, a.site, a.user) < std::tie(b.grasped_at, b.site, b.user);
}

}  // namespace

GraspDecision MappingEngine::grasp(const ObjectId& object, const Authority& request) {
  auto it = holds_.find(object);
  if (it == holds_.end() || (it->second.user == request.user && it->second.site == request.site)) {
    if (it == holds_.end()) {
      holds_.emplace(object, request);
    }
    sync_authority(object);
    return {holds_.at(object), std::nullopt, true};
  }
  GraspDecision d;
  if (earlier(request, it->second)) {
    d.loser = it->second;
    it->second = request;
    d.requester_won = true;
  } else {
    d.loser = request;
    d.requester_won = false;
  }
  d.winner = it->second;
  sync_authority(object);
  return d;
}

std::optional<Authority> MappingEngine::release(const ObjectId& object, const UserId& user) {
  auto it = holds_.find(object);
  if (it == holds_.end() || it->second.user != user) {
    return std::nullopt;
  }
  Authority old = it->second;
  holds_.erase(it);
  sync_authority(object);
  return old;
}

std::optional<Authority> MappingEngine::holder(const ObjectId& object) const {
  auto it = holds_.find(object);
  if (it == holds_.end()) return std::nullopt;
  return it->second;
}

void MappingEngine::sync_authority(const ObjectId& object) {
  for (auto& [id, b] : bindings_) {
    if (b.kind == BindingKind::one_to_many || !b.has_object(object)) continue;
    auto h = holds_.find(object);
    if (h == holds_.end()) {
      b.authority.reset();
    } else {
      b.authority = h->second;
    }
  }
}

const MappingBinding* MappingEngine::find(const std::string& binding_id) const {
  auto it = bindings_.find(binding_id);
  return it == bindings_.end() ? nullptr : &it->second;
}

const MappingBinding* MappingEngine::binding_for_object(const ObjectId& object) const {
  for (const auto& [id, b] : bindings_) {
    if (b.has_object(object)) return &b;
  }
  return nullptr;
}

const MappingBinding* MappingEngine::binding_for_proxy(const ProxyId& proxy) const {
  for (const auto& [id, b] : bindings_) {
    if (b.has_proxy(proxy)) return &b;
  }
  return nullptr;
}

}  // namespace physhare::mapping
