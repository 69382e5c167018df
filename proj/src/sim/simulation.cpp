#include "physhare/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/error.hpp"
#include "physhare/core/json_codec.hpp"

namespace physhare::sim {

namespace {

constexpr double kGoalChange = 1e-3;  // m
constexpr double kHeadingChange = 0.01;
constexpr double kSlop = 1e-9;

int input_rank(InputKind k) { return (k == InputKind::hand || k == InputKind::wrist) ? 0 : 1; }

double heading_error(double a, double b, bool symmetric) {
  const double d = std::abs(heading_delta(a, b));
  return symmetric ? std::min(d, kPi - d) : d;
}

}  // namespace

std::string_view to_string(GraspMode m) { return m == GraspMode::physical ? "physical" : "virtual"; }

GraspMode grasp_mode_from_string(std::string_view s) {
  if (s == "physical") return GraspMode::physical;
  if (s == "virtual") return GraspMode::virtual_grasp;
  throw ContractViolation("unknown grasp mode '" + std::string(s) + "'");
}

std::string_view to_string(InputKind k) {
  switch (k) {
    case InputKind::hand:
      return "hand";
    case InputKind::wrist:
      return "wrist";
    case InputKind::grasp:
      return "grasp";
    case InputKind::release:
      return "release";
    case InputKind::touch:
      return "touch";
  }
  return "?";
}

std::optional<Millis> SetdownRecord::slack() const {
  if (!display || !arrival) return std::nullopt;
  return *display - *arrival;
}

Simulation::Simulation(SimConfig config, std::vector<VirtualObject> objects, std::vector<RobotProxy> proxies,
                       const std::vector<BindingSpec>& bindings)
    : config_(std::move(config)) {
  if (config_.dt <= 0) throw ContractViolation("tick length must be positive");
  if (config_.sites.empty()) throw ContractViolation("simulation needs at least one site");
  if (!(config_.epsilon > 0.0) || !(config_.hand_speed > 0.0)) {
    throw ContractViolation("epsilon and hand speed must be positive");
  }
  const auto& ws = config_.workspace;
  for (const auto& s : config_.sites) {
    if (s.artificial_latency < 0) throw ContractViolation("artificial latency must be non-negative");
    if (!sites_.emplace(s.id, s).second) throw ContractViolation("duplicate site '" + s.id + "'");
    buffers_.try_emplace(s.id, s.artificial_latency);
  }
  for (auto& o : objects) {
    if (!o.held_by && !ws.contains(o.pose)) {
      throw ContractViolation("object '" + o.id + "' starts outside the workspace");
    }
    if (!state_.objects.emplace(o.id, o).second) throw ContractViolation("duplicate object '" + o.id + "'");
    object_rt_[o.id];
  }
  for (auto& p : proxies) {
    p.profile.validate();
    if (!sites_.contains(p.site)) throw ContractViolation("proxy '" + p.id + "' is at unknown site '" + p.site + "'");
    if (!ws.contains(p.pose)) throw ContractViolation("proxy '" + p.id + "' starts outside the workspace");
    if (!state_.proxies.emplace(p.id, p).second) throw ContractViolation("duplicate proxy '" + p.id + "'");
    proxy_rt_.try_emplace(p.id, ProxyRuntime{{}, {}, {}, false, retarget::ReplanGate(config_.replan_interval), p.pose,
                                             p.carried_by.has_value()});
  }
  for (const auto& spec : bindings) {
    switch (spec.kind) {
      case BindingKind::one_to_one:
        if (spec.objects.size() != 1 || spec.proxies.size() != 1) {
          throw mapping::BindingError("one-to-one binding needs exactly one object and one proxy");
        }
        mapping_.bind_one_to_one(state_, spec.objects[0], spec.proxies[0]);
        break;
      case BindingKind::one_to_many:
        mapping_.bind_one_to_many(state_, spec.objects, spec.proxies);
        break;
      case BindingKind::many_to_one:
        if (spec.objects.size() != 1) throw mapping::BindingError("many-to-one binding needs exactly one object");
        mapping_.bind_many_to_one(state_, spec.objects[0], spec.proxies);
        break;
    }
  }
  for (const auto& [id, b] : mapping_.bindings()) {
    emit("binding", {{"change", "bind"}, {"binding", b}});
  }
  for (const auto& s : config_.sites) {
    auto& view = state_.views[s.id];
    for (const auto& [id, o] : state_.objects) view[id] = o.pose;
  }
  update_states();
  sync_snapshot();
  digest_ = sha256_hex(canonical_json(state_));
}

const SiteConfig& Simulation::site(const SiteId& id) const {
  auto it = sites_.find(id);
  if (it == sites_.end()) throw ContractViolation("unknown site '" + id + "'");
  return it->second;
}

SiteFrame Simulation::frame_of(const SiteId& id) const {
  return SiteFrame{site(id).mirrored, config_.workspace.width(), config_.workspace.depth()};
}

void Simulation::set_latency(const SiteId& s, Millis latency) {
  if (latency < 0) throw ContractViolation("artificial latency must be non-negative");
  site(s);
  sites_[s].artificial_latency = latency;
  buffers_.at(s).set_latency(latency);
}

std::optional<motion::MotionPlan> Simulation::plan_of(const ProxyId& proxy) const {
  auto it = proxy_rt_.find(proxy);
  if (it == proxy_rt_.end() || !it->second.progress) return std::nullopt;
  return it->second.progress->plan;
}

std::vector<OutboundMessage> Simulation::take_outbox() {
  std::vector<OutboundMessage> out;
  out.swap(outbox_);
  return out;
}

void Simulation::emit(std::string msg_type, nlohmann::json payload) {
  outbox_.push_back({std::move(msg_type), std::move(payload)});
}

std::optional<ProxyId> Simulation::active_proxy(const ObjectId& object, const SiteId& s) const {
  const auto* b = mapping_.binding_for_object(object);
  if (b == nullptr) return std::nullopt;
  auto it = b->active.find(s);
  if (it == b->active.end()) return std::nullopt;
  if (b->kind == BindingKind::one_to_many) {
    auto f = b->focus.find(s);
    if (f == b->focus.end() || f->second != object) return std::nullopt;
  }
  return it->second;
}

Pose2D Simulation::contact_pose(const VirtualObject& wall, Vec2 hand_shared) const {
  const Vec2 u = Vec2::from_angle(wall.pose.heading());
  const double half = wall.extent / 2.0;
  const double s = std::clamp((hand_shared - wall.pose.position()).dot(u), -half, half);
  const Vec2 p = config_.workspace.clamp(wall.pose.position() + u * s);
  return Pose2D(p, wall.pose.heading());
}

// ------------------------------------------------------------------ tick

const WorldState& Simulation::advance(std::vector<SiteInput> inputs, std::optional<Millis> dt) {
  const Millis step = dt.value_or(config_.dt);
  if (step <= 0) throw ContractViolation("advance requires dt > 0");
  const Millis t0 = state_.sim_time;
  const Millis t1 = t0 + step;

  for (const auto& in : inputs) {
    auto s = sites_.find(in.site);
    if (s == sites_.end()) throw CorruptInput("input from unknown site '" + in.site + "'");
    if (in.user != s->second.user) {
      throw CorruptInput("user '" + in.user + "' does not belong to site '" + in.site + "'");
    }
    if (in.timestamp > t1) {
      throw CorruptInput("input at " + std::to_string(in.timestamp) + " ms is ahead of the tick ending at " +
                         std::to_string(t1) + " ms");
    }
    if (in.kind != InputKind::hand && in.kind != InputKind::wrist && !state_.objects.contains(in.object)) {
      throw CorruptInput("input names unknown object '" + in.object + "'");
    }
  }
  std::stable_sort(inputs.begin(), inputs.end(), [](const SiteInput& a, const SiteInput& b) {
    return std::pair(a.timestamp, input_rank(a.kind)) < std::pair(b.timestamp, input_rank(b.kind));
  });
  for (const auto& in : inputs) {
    if (in.kind == InputKind::hand || in.kind == InputKind::wrist) {
      auto [it, fresh] = last_frame_.try_emplace({in.site, in.user, static_cast<int>(in.kind)}, in.timestamp);
      if (!fresh) {
        if (in.timestamp <= it->second) {
          throw CorruptInput("non-monotonic " + std::string(to_string(in.kind)) + " frame for '" + in.user +
                             "' at " + std::to_string(in.timestamp) + " ms");
        }
        it->second = in.timestamp;
      }
    }
    if (in.timestamp <= t0) ++log_.late_inputs;
  }

  for (auto& [id, p] : state_.proxies) {
    auto& rt = proxy_rt_.at(id);
    rt.tick_start = p.pose;
    rt.carried_at_start = p.carried_by.has_value();
  }

  std::vector<SiteInput> touches;
  for (const auto& in : inputs) {
    if (in.kind == InputKind::touch) {
      touches.push_back(in);
    } else {
      apply(in, t1);
    }
  }

  evaluate_goals(t0, t1);
  execute(step);
  update_states();

  for (auto it = open_setdowns_.begin(); it != open_setdowns_.end();) {
    auto& r = log_.setdowns[it->second];
    const auto& p = state_.proxies.at(r.proxy);
    if (!r.arrival && p.state == ProxyState::engaged && distance(p.pose, r.goal) <= config_.epsilon) {
      r.arrival = t1;
    }
    it = (r.arrival && r.display) ? open_setdowns_.erase(it) : std::next(it);
  }

  release_views(t1);
  check_touches(touches, t1);
  check_invariants(t1, step);

  ++state_.tick;
  state_.sim_time = t1;
  sync_snapshot();
  digest_ = chain_digest(digest_, canonical_json(state_));
  return state_;
}

void Simulation::apply(const SiteInput& in, Millis now) {
  switch (in.kind) {
    case InputKind::hand:
      apply_hand(in, now);
      break;
    case InputKind::wrist:
      apply_wrist(in, now);
      break;
    case InputKind::grasp:
      apply_grasp(in, now);
      break;
    case InputKind::release:
      apply_release(in, now);
      break;
    case InputKind::touch:
      break;
  }
}

void Simulation::set_object_pose(const ObjectId& id, const Pose2D& pose, const SiteId& origin, Millis ts,
                                 Millis now) {
  state_.objects.at(id).pose = pose;
  state_.views[origin][id] = pose;
  push_remote(origin, id, pose, ts, now, retarget::UpdateKind::motion);
}

void Simulation::push_remote(const SiteId& origin, const ObjectId& object, const Pose2D& pose, Millis ts,
                             Millis received_at, retarget::UpdateKind kind, std::uint64_t event_id) {
  for (auto& [s, buffer] : buffers_) {
    if (s == origin) continue;
    buffer.push({TrackedFrame{object, pose, ts}, kind, received_at, event_id});
  }
}

void Simulation::apply_hand(const SiteInput& in, Millis now) {
  hands_[{in.site, in.user}] = in.pose;
  const Pose2D shared = frame_of(in.site).to_shared(in.pose);
  for (auto& [id, rt] : object_rt_) {
    if (!rt.holder || rt.holder->site != in.site || rt.holder->user != in.user) continue;
    set_object_pose(id, shared, in.site, in.timestamp, now);
    rt.predictor.observe(shared, in.timestamp);
    if (rt.holder->carried) {
      state_.proxies.at(*rt.holder->carried).pose = in.pose;
    }
  }
  update_focus(in.site, in.user, now);
}

void Simulation::update_focus(const SiteId& s, const UserId& user, Millis now) {
  const auto hand = hands_.find({s, user});
  if (hand == hands_.end()) return;
  const SiteFrame frame = frame_of(s);
  const Pose2D hand_shared = frame.to_shared(hand->second);
  std::vector<std::string> ids;
  for (const auto& [id, b] : mapping_.bindings()) {
    if (b.kind == BindingKind::one_to_many && !b.proxies_at(s).empty()) ids.push_back(id);
  }
  for (const auto& id : ids) {
    const MappingBinding& b = *mapping_.find(id);
    std::vector<VirtualObject> candidates;
    for (const auto& o : b.virtual_ids) candidates.push_back(state_.objects.at(o));
    std::optional<ObjectId> current;
    if (auto f = b.focus.find(s); f != b.focus.end()) current = f->second;
    const ObjectId focus = mapping::hand_focus(candidates, TrackedFrame{user, hand_shared, now}, current);
    if (current && *current == focus && b.active.contains(s)) continue;
    const auto& obj = state_.objects.at(focus);
    const Pose2D target = obj.extent > 0.0 ? contact_pose(obj, hand_shared.position()) : obj.pose;
    const auto result =
        mapping_.dispatch_nearest(id, frame.to_local(target).position(), s, state_.proxies, focus);
    if (const auto* d = std::get_if<mapping::Dispatch>(&result)) {
      ++log_.reassignments;
      if (d->released) {
        ++log_.handoffs;
        cancel_motion(*d->released);
      }
      emit("binding", {{"change", "dispatch"},
                       {"site", s},
                       {"focus", focus},
                       {"proxy", d->proxy},
                       {"binding", *mapping_.find(id)}});
    } else {
      ++log_.unserviceable;
      emit("scenario-event", {{"event", "unserviceable"}, {"binding", id}, {"site", s}, {"focus", focus}});
    }
  }
}

void Simulation::apply_wrist(const SiteInput& in, Millis now) {
  const Pose2D shared = frame_of(in.site).to_shared(in.pose);
  auto ev = recognizers_[{in.site, in.user}].feed(gesture::WristSample{in.user, shared, in.timestamp});
  if (!ev) return;
  GestureRecord rec{now, in.site, in.user, ev->kind, ev->magnitude, std::nullopt, std::nullopt, std::nullopt};
  std::vector<VirtualObject> candidates;
  for (const auto& [id, o] : state_.objects) {
    if (!o.held_by && o.extent == 0.0) candidates.push_back(o);
  }
  if (!candidates.empty()) {
    const auto res = gesture::resolve_target(*ev, TrackedFrame{in.user, shared, in.timestamp}, candidates,
                                             config_.workspace);
    if (const auto* t = std::get_if<gesture::TargetResolution>(&res)) {
      rec.object = t->object;
      rec.anchor = t->anchor;
      rec.goal = t->goal;
      if (auto p = active_proxy(t->object, in.site)) {
        auto& ort = object_rt_.at(t->object);
        ort.driver = *p;
        ort.command_goal = t->goal;
      }
    }
  }
  nlohmann::json payload = {{"event", "gesture"},
                            {"site", in.site},
                            {"user", in.user},
                            {"kind", gesture::to_string(ev->kind)},
                            {"direction", ev->direction},
                            {"magnitude", ev->magnitude},
                            {"at", ev->at}};
  payload["object"] = rec.object ? nlohmann::json(*rec.object) : nlohmann::json(nullptr);
  payload["anchor"] = rec.anchor ? nlohmann::json(*rec.anchor) : nlohmann::json(nullptr);
  emit("scenario-event", std::move(payload));
  log_.gestures.push_back(std::move(rec));
}

void Simulation::quiescence_check(const ObjectId& object, Millis now) {
  const auto* b = mapping_.binding_for_object(object);
  if (b == nullptr || b->kind != BindingKind::many_to_one) return;
  const auto& obj = state_.objects.at(object);
  double worst = 0.0;
  for (const auto& ref : b->proxies) {
    const Pose2D shared = frame_of(ref.site).to_shared(state_.proxies.at(ref.proxy).pose);
    worst = std::max(worst, distance(shared, obj.pose));
  }
  log_.quiescent.push_back({now, object, worst, worst <= config_.epsilon});
}

void Simulation::cancel_motion(const ProxyId& proxy) {
  auto& rt = proxy_rt_.at(proxy);
  rt.progress.reset();
  rt.task.reset();
  rt.goal.reset();
  rt.needs_plan = false;
}

void Simulation::apply_grasp(const SiteInput& in, Millis now) {
  auto& rt = object_rt_.at(in.object);
  const bool was_held = rt.holder.has_value();
  if (!was_held) quiescence_check(in.object, now);

  const Authority request{in.site, in.user, in.timestamp};
  const auto previous = mapping_.holder(in.object);
  const auto decision = mapping_.grasp(in.object, request);
  if (decision.loser) {
    log_.conflicts.push_back({now, in.object, decision.winner, *decision.loser});
    emit("scenario-event", {{"event", "conflict"},
                            {"object", in.object},
                            {"winner", decision.winner},
                            {"loser", *decision.loser}});
  }
  if (!decision.requester_won) return;
  if (previous && previous->site == in.site && previous->user == in.user) return;

  if (rt.holder && rt.holder->carried) {
    state_.proxies.at(*rt.holder->carried).carried_by.reset();
  }
  Holder h{in.site, in.user, in.mode, std::nullopt};
  if (in.mode == GraspMode::physical) {
    if (auto p = active_proxy(in.object, in.site)) {
      cancel_motion(*p);
      state_.proxies.at(*p).carried_by = in.user;
      h.carried = *p;
    }
  }
  auto& obj = state_.objects.at(in.object);
  obj.held_by = in.user;
  rt.holder = h;
  rt.driver.reset();
  rt.predictor.reset();
  rt.predictor.observe(obj.pose, in.timestamp);
  if (!was_held) {
    rt.hold_since = in.timestamp;
    rt.hold_start.clear();
    for (const auto& s : config_.sites) {
      if (auto p = active_proxy(in.object, s.id)) rt.hold_start[s.id] = state_.proxies.at(*p).pose;
    }
  }
  emit("binding", {{"change", "authority"}, {"object", in.object}, {"binding", *mapping_.binding_for_object(in.object)}});
}

void Simulation::apply_release(const SiteInput& in, Millis now) {
  auto& rt = object_rt_.at(in.object);
  const auto old = mapping_.release(in.object, in.user);
  if (!old || !rt.holder) {
    ++log_.ignored_releases;
    return;
  }
  const Holder holder = *rt.holder;
  if (holder.carried) state_.proxies.at(*holder.carried).carried_by.reset();
  rt.holder.reset();
  rt.predictor.reset();
  auto& obj = state_.objects.at(in.object);
  obj.held_by.reset();
  const Vec2 inside = config_.workspace.clamp(obj.pose.position());
  if (inside != obj.pose.position()) obj.pose = obj.pose.with_position(inside);
  const Pose2D setdown = obj.pose;
  state_.views[in.site][in.object] = setdown;

  for (const auto& s : config_.sites) {
    if (s.id == in.site) continue;
    std::uint64_t event_id = 0;
    if (auto p = active_proxy(in.object, s.id)) {
      SetdownRecord r;
      r.id = log_.setdowns.size() + 1;
      r.object = in.object;
      r.holder_site = in.site;
      r.site = s.id;
      r.proxy = *p;
      r.grasp_at = rt.hold_since;
      auto start = rt.hold_start.find(s.id);
      r.start_pose = start != rt.hold_start.end() ? start->second : state_.proxies.at(*p).pose;
      r.release_at = in.timestamp;
      r.goal = frame_of(s.id).to_local(setdown);
      r.deadline = retarget::release_deadline(now, sites_.at(s.id).artificial_latency);
      event_id = r.id;
      // A record still open for this viewer is superseded by the new set-down.
      open_setdowns_[{in.object, s.id}] = log_.setdowns.size();
      log_.setdowns.push_back(std::move(r));
    }
    buffers_.at(s.id).push(
        {TrackedFrame{in.object, setdown, in.timestamp}, retarget::UpdateKind::setdown, now, event_id});
  }
  emit("binding", {{"change", "authority"}, {"object", in.object}, {"binding", *mapping_.binding_for_object(in.object)}});
}

// ------------------------------------------------------------------ goals and motion

std::optional<Simulation::Goal> Simulation::desired_goal(const RobotProxy& proxy, Millis now) const {
  if (proxy.carried_by) return std::nullopt;
  const auto* b = mapping_.binding_for_proxy(proxy.id);
  if (b == nullptr) return std::nullopt;
  const SiteFrame frame = frame_of(proxy.site);
  Goal g;
  if (b->kind == BindingKind::one_to_many) {
    auto a = b->active.find(proxy.site);
    auto f = b->focus.find(proxy.site);
    if (a == b->active.end() || a->second != proxy.id || f == b->focus.end()) return std::nullopt;
    const auto& obj = state_.objects.at(f->second);
    if (obj.extent > 0.0) {
      auto hand = hands_.find({proxy.site, sites_.at(proxy.site).user});
      const Vec2 h = hand != hands_.end() ? frame.to_shared(hand->second).position() : obj.pose.position();
      g.pose = frame.to_local(contact_pose(obj, h));
      g.heading_matters = true;
    } else {
      g.pose = frame.to_local(obj.pose);
    }
    g.reason = "dispatch";
  } else {
    const ObjectId& oid = b->virtual_ids.front();
    const auto& obj = state_.objects.at(oid);
    const auto& ort = object_rt_.at(oid);
    if (ort.holder) {
      if (ort.holder->carried == proxy.id) return std::nullopt;
      const Pose2D predicted = ort.predictor.predict(config_.workspace.anchors()).value_or(obj.pose);
      g.pose = frame.to_local(predicted);
      if (ort.holder->site != proxy.site) {
        g.deadline = retarget::rolling_deadline(now, sites_.at(proxy.site).artificial_latency,
                                                distance(obj.pose, predicted), config_.hand_speed);
      }
      g.reason = "follow";
    } else if (ort.driver == proxy.id) {
      g.pose = frame.to_local(ort.command_goal);
      g.reason = "gesture";
    } else {
      g.pose = frame.to_local(obj.pose);
      g.reason = "sync";
      auto open = open_setdowns_.find({oid, proxy.site});
      if (open != open_setdowns_.end()) {
        const auto& r = log_.setdowns[open->second];
        if (r.proxy == proxy.id && !r.arrival) {
          g.deadline = r.deadline;
          g.source = retarget::PredictionSource::release_event;
          g.reason = "setdown";
        }
      }
    }
  }
  g.pose = g.pose.with_position(config_.workspace.clamp(g.pose.position()));
  return g;
}

void Simulation::evaluate_goals(Millis t0, Millis t1) {
  for (auto& [id, proxy] : state_.proxies) {
    auto& rt = proxy_rt_.at(id);
    auto g = desired_goal(proxy, t1);
    if (!g) {
      if (rt.goal && !proxy.carried_by) cancel_motion(id);
      rt.goal.reset();
      continue;
    }
    const bool changed =
        !rt.goal || distance(rt.goal->pose, g->pose) > kGoalChange ||
        (g->heading_matters && heading_error(rt.goal->pose.heading(), g->pose.heading(), true) > kHeadingChange);
    if (!changed) {
      rt.goal->deadline = g->deadline;
      rt.goal->source = g->source;
      if (rt.task) rt.task->deadline = g->deadline.value_or(0);
    } else {
      rt.goal = g;
      const bool at_goal = distance(proxy.pose, g->pose) < kSlop &&
                           (!g->heading_matters || heading_error(proxy.pose.heading(), g->pose.heading(), true) < 1e-6);
      if (at_goal && !rt.progress) {
        rt.needs_plan = false;
      } else {
        const std::uint32_t revision = rt.task ? rt.task->revision + 1 : 1;
        rt.task = retarget::RetargetTask{id, g->pose, g->deadline.value_or(0), g->source, revision};
        rt.needs_plan = true;
        emit("retarget", {{"proxy_id", id},
                          {"site", proxy.site},
                          {"predicted_goal", g->pose},
                          {"deadline", g->deadline ? nlohmann::json(*g->deadline) : nlohmann::json(nullptr)},
                          {"prediction_source", retarget::to_string(g->source)},
                          {"revision", revision},
                          {"reason", g->reason}});
      }
    }
    if (rt.needs_plan && rt.gate.ready(t1)) plan(proxy, rt, t0);
  }
}

void Simulation::plan(RobotProxy& proxy, ProxyRuntime& rt, Millis t0) {
  std::vector<motion::PathObstacle> others;
  for (const auto& [oid, other] : state_.proxies) {
    if (oid == proxy.id || other.site != proxy.site) continue;
    const auto& ort = proxy_rt_.at(oid);
    others.push_back(motion::obstacle_for(other, ort.progress ? &ort.progress->plan : nullptr,
                                          ort.progress ? ort.progress->next : 0));
  }
  motion::PlannerOptions opts;
  opts.tick = config_.dt;
  if (rt.goal->heading_matters) {
    opts.final_heading = rt.goal->pose.heading();
    opts.final_heading_symmetric = true;
  }
  const Millis t1 = t0 + config_.dt;
  motion::PlanResult result = rt.goal->deadline
                                  ? retarget::schedule_remote_catch_up(*rt.task, proxy, others, config_.workspace, t0, opts)
                                  : motion::plan_path(proxy, rt.goal->pose, others, config_.workspace, t0, std::nullopt, opts);
  if (const auto* blocked = std::get_if<motion::Blocked>(&result)) {
    ++log_.blocked_plans;
    rt.gate.mark(t1);
    emit("retarget", {{"proxy_id", proxy.id}, {"diagnostic", "blocked"}, {"reason", blocked->reason}, {"at", t1}});
    return;
  }
  motion::MotionPlan plan;
  if (auto* infeasible = std::get_if<motion::DeadlineInfeasible>(&result)) {
    ++log_.infeasible_plans;
    emit("retarget", {{"proxy_id", proxy.id}, {"diagnostic", "deadline-infeasible"}, {"deficit", infeasible->deficit},
                      {"at", t1}});
    plan = std::move(infeasible->plan);
  } else {
    plan = std::move(std::get<motion::MotionPlan>(result));
  }
  rt.needs_plan = false;
  if (plan.empty()) {
    rt.progress.reset();
    return;
  }
  ++log_.replans;
  rt.gate.mark(t1);
  rt.progress = motion::PlanProgress{std::move(plan), 0};
}

void Simulation::execute(Millis dt) {
  for (auto& [id, proxy] : state_.proxies) {
    auto& rt = proxy_rt_.at(id);
    if (proxy.carried_by || !rt.progress) continue;
    const bool done = motion::execute_tick(proxy, *rt.progress, dt);
    if (done) rt.progress.reset();
    for (auto& [oid, ort] : object_rt_) {
      if (ort.driver != id) continue;
      auto& obj = state_.objects.at(oid);
      const SiteFrame frame = frame_of(proxy.site);
      const Pose2D pose = done && distance(frame.to_shared(proxy.pose), ort.command_goal) <= config_.epsilon
                              ? ort.command_goal
                              : Pose2D(frame.to_shared(proxy.pose).position(), obj.pose.heading());
      set_object_pose(oid, pose, proxy.site, state_.sim_time + dt, state_.sim_time + dt);
      if (done) ort.driver.reset();
    }
  }
}

std::optional<Pose2D> Simulation::target_pose(const RobotProxy& proxy, bool* heading_matters) const {
  *heading_matters = false;
  const auto* b = mapping_.binding_for_proxy(proxy.id);
  if (b == nullptr) return std::nullopt;
  const SiteFrame frame = frame_of(proxy.site);
  if (b->kind == BindingKind::one_to_many) {
    auto a = b->active.find(proxy.site);
    auto f = b->focus.find(proxy.site);
    if (a == b->active.end() || a->second != proxy.id || f == b->focus.end()) return std::nullopt;
    const auto& obj = state_.objects.at(f->second);
    if (obj.extent > 0.0) {
      auto hand = hands_.find({proxy.site, sites_.at(proxy.site).user});
      const Vec2 h = hand != hands_.end() ? frame.to_shared(hand->second).position() : obj.pose.position();
      *heading_matters = true;
      return frame.to_local(contact_pose(obj, h));
    }
    return frame.to_local(obj.pose);
  }
  return frame.to_local(state_.objects.at(b->virtual_ids.front()).pose);
}

bool Simulation::engaged_at(const RobotProxy& proxy, const Pose2D& target, bool heading_matters) const {
  if (distance(proxy.pose, target) > config_.epsilon) return false;
  return !heading_matters || heading_error(proxy.pose.heading(), target.heading(), true) <= config_.heading_epsilon;
}

void Simulation::update_states() {
  for (auto& [id, proxy] : state_.proxies) {
    const auto& rt = proxy_rt_.at(id);
    if (proxy.carried_by) {
      proxy.state = ProxyState::engaged;
    } else if (rt.progress) {
      proxy.state = ProxyState::repositioning;
    } else {
      bool hm = false;
      const auto target = target_pose(proxy, &hm);
      proxy.state = target && engaged_at(proxy, *target, hm) ? ProxyState::engaged : ProxyState::idle;
    }
  }
}

void Simulation::release_views(Millis now) {
  for (auto& [s, buffer] : buffers_) {
    for (const auto& u : buffer.delayed_view(now)) {
      state_.views[s][u.frame.subject_id] = u.frame.pose;
      if (u.kind != retarget::UpdateKind::setdown || u.event_id == 0) continue;
      auto& r = log_.setdowns.at(u.event_id - 1);
      r.display = now;
      const auto& p = state_.proxies.at(r.proxy);
      const bool ok = p.state == ProxyState::engaged && distance(p.pose, r.goal) <= config_.epsilon;
      if (!ok) {
        r.illusion_break = true;
        ++log_.illusion_breaks;
        emit("retarget", {{"proxy_id", r.proxy},
                          {"diagnostic", "illusion-break"},
                          {"object", r.object},
                          {"site", r.site},
                          {"display_at", now},
                          {"miss", distance(p.pose, r.goal)}});
      }
      auto open = open_setdowns_.find({r.object, r.site});
      if (open != open_setdowns_.end() && open->second == u.event_id - 1 && r.arrival) open_setdowns_.erase(open);
    }
  }
}

void Simulation::check_touches(const std::vector<SiteInput>& touches, Millis now) {
  for (const auto& in : touches) {
    TouchRecord rec{now, in.site, in.object, std::nullopt, 0.0, false};
    const auto& obj = state_.objects.at(in.object);
    const SiteFrame frame = frame_of(in.site);
    if (auto p = active_proxy(in.object, in.site)) {
      rec.proxy = *p;
      const auto& proxy = state_.proxies.at(*p);
      const bool wall = obj.extent > 0.0;
      const Pose2D target =
          frame.to_local(wall ? contact_pose(obj, frame.to_shared(in.pose).position()) : obj.pose);
      rec.error = distance(proxy.pose, target);
      rec.ok = proxy.state == ProxyState::engaged && engaged_at(proxy, target, wall);
    }
    log_.touches.push_back(std::move(rec));
  }
}

void Simulation::check_invariants(Millis now, Millis dt) {
  const double seconds = static_cast<double>(dt) / 1000.0;
  for (const auto& [id, p] : state_.proxies) {
    const auto& rt = proxy_rt_.at(id);
    if (p.carried_by || rt.carried_at_start) continue;
    const double moved = distance(rt.tick_start, p.pose);
    const double turned = std::abs(heading_delta(rt.tick_start.heading(), p.pose.heading()));
    if (moved > p.profile.max_linear_speed * seconds + kSlop) {
      log_.violations.push_back({now, "speed", id + " moved " + std::to_string(moved) + " m"});
    }
    if (turned > p.profile.max_angular_speed * seconds + kSlop) {
      log_.violations.push_back({now, "turn-rate", id + " turned " + std::to_string(turned) + " rad"});
    }
  }
  for (auto a = state_.proxies.begin(); a != state_.proxies.end(); ++a) {
    for (auto b = std::next(a); b != state_.proxies.end(); ++b) {
      if (a->second.site != b->second.site) continue;
      const double need = a->second.profile.footprint_radius + b->second.profile.footprint_radius;
      const double d = distance(a->second.pose, b->second.pose);
      if (d < need - kSlop) {
        log_.violations.push_back({now, "clearance", a->first + "/" + b->first + " at " + std::to_string(d) + " m"});
      }
    }
  }
  std::map<ProxyId, int> active_count;
  for (const auto& [bid, b] : mapping_.bindings()) {
    std::set<ProxyId> seen;
    for (const auto& [s, p] : b.active) seen.insert(p);
    for (const auto& p : seen) ++active_count[p];
  }
  for (const auto& [p, n] : active_count) {
    if (n > 1) log_.violations.push_back({now, "exclusivity", p + " active in " + std::to_string(n) + " bindings"});
  }
}

void Simulation::finish() {
  for (const auto& [id, rt] : object_rt_) {
    if (!rt.holder) quiescence_check(id, state_.sim_time);
  }
}

void Simulation::sync_snapshot() {
  state_.bindings = mapping_.bindings();
  state_.plans.clear();
  state_.tasks.clear();
  for (const auto& [id, rt] : proxy_rt_) {
    if (rt.progress) {
      const auto& w = rt.progress->plan.waypoints;
      state_.plans[id] = std::vector<Pose2D>(w.begin() + static_cast<std::ptrdiff_t>(rt.progress->next), w.end());
    }
    if (rt.task && rt.goal) {
      state_.tasks[id] = TaskSnapshot{rt.task->predicted_goal, rt.goal->deadline, rt.task->revision,
                                      std::string(retarget::to_string(rt.task->prediction_source))};
    }
  }
}

// ------------------------------------------------------------------ JSON

namespace {

nlohmann::json opt(const std::optional<Millis>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const SetdownRecord& r) {
  return {{"id", r.id},
          {"object", r.object},
          {"holder_site", r.holder_site},
          {"site", r.site},
          {"proxy", r.proxy},
          {"grasp_at", r.grasp_at},
          {"start_pose", r.start_pose},
          {"release_at", opt(r.release_at)},
          {"goal", r.goal},
          {"deadline", opt(r.deadline)},
          {"arrival", opt(r.arrival)},
          {"display", opt(r.display)},
          {"slack", opt(r.slack())},
          {"illusion_break", r.illusion_break}};
}

nlohmann::json to_json(const GestureRecord& r) {
  return {{"at", r.at},
          {"site", r.site},
          {"user", r.user},
          {"kind", gesture::to_string(r.kind)},
          {"magnitude", r.magnitude},
          {"object", r.object ? nlohmann::json(*r.object) : nlohmann::json(nullptr)},
          {"anchor", r.anchor ? nlohmann::json(*r.anchor) : nlohmann::json(nullptr)},
          {"goal", r.goal ? nlohmann::json(*r.goal) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const TouchRecord& r) {
  return {{"at", r.at},
          {"site", r.site},
          {"object", r.object},
          {"proxy", r.proxy ? nlohmann::json(*r.proxy) : nlohmann::json(nullptr)},
          {"error", r.error},
          {"ok", r.ok}};
}

nlohmann::json to_json(const ConflictRecord& r) {
  return {{"at", r.at}, {"object", r.object}, {"winner", r.winner}, {"loser", r.loser}};
}

nlohmann::json to_json(const QuiescentCheck& r) {
  return {{"at", r.at}, {"object", r.object}, {"max_error", r.max_error}, {"ok", r.ok}};
}

nlohmann::json to_json(const Violation& v) { return {{"at", v.at}, {"kind", v.kind}, {"detail", v.detail}}; }

}  // namespace physhare::sim
