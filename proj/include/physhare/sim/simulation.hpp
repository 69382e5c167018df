#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "physhare/core/types.hpp"
#include "physhare/core/world_state.hpp"
#include "physhare/gesture/gesture.hpp"
#include "physhare/mapping/mapping_engine.hpp"
#include "physhare/motion/executor.hpp"
#include "physhare/retarget/delay_buffer.hpp"
#include "physhare/retarget/retargeting.hpp"

namespace physhare::sim {

/// How a grasp couples the user to the object. A physical grasp picks up the
/// site's own proxy, which then follows the hand; a virtual grasp moves only
/// the virtual object (telekinetic placement) and lets the proxy catch up.
enum class GraspMode { physical, virtual_grasp };

std::string_view to_string(GraspMode m);
GraspMode grasp_mode_from_string(std::string_view s);

enum class InputKind { hand, wrist, grasp, release, touch };

std::string_view to_string(InputKind k);

/// One observation or user action reported by a site, in that site's local frame.
struct SiteInput {
  InputKind kind = InputKind::hand;
  SiteId site;
  UserId user;
  /// Target of grasp, release and touch.
  ObjectId object;
  /// Hand or wrist pose for frames; contact hand pose for touches.
  Pose2D pose;
  Millis timestamp = 0;
  GraspMode mode = GraspMode::physical;
};

struct SiteConfig {
  SiteId id;
  UserId user;
  bool mirrored = false;
  Millis artificial_latency = retarget::kDefaultArtificialLatency;
};

struct SimConfig {
  Workspace workspace = Workspace::default_tabletop();
  std::vector<SiteConfig> sites;
  Millis dt = 10;
  /// Arrival/engagement tolerance.
  double epsilon = 0.01;
  double heading_epsilon = 0.1;
  double hand_speed = retarget::kAssumedHandSpeed;
  Millis replan_interval = retarget::kReplanInterval;
};

struct BindingSpec {
  BindingKind kind = BindingKind::one_to_one;
  std::vector<ObjectId> objects;
  std::vector<ProxyId> proxies;
};

/// Bookkeeping for one remote set-down as seen by one other site's proxy.
struct SetdownRecord {
  std::uint64_t id = 0;
  ObjectId object;
  SiteId holder_site;
  SiteId site;
  ProxyId proxy;
  Millis grasp_at = 0;
  /// Viewer proxy pose when the hold began (its local frame).
  Pose2D start_pose;
  std::optional<Millis> release_at;
  /// Set-down pose in the viewer's local frame.
  Pose2D goal;
  std::optional<Millis> deadline;
  std::optional<Millis> arrival;
  std::optional<Millis> display;
  bool illusion_break = false;

  /// Display time minus arrival time, once both are known.
  std::optional<Millis> slack() const;
};

struct GestureRecord {
  Millis at = 0;
  SiteId site;
  UserId user;
  gesture::GestureKind kind = gesture::GestureKind::push;
  double magnitude = 0.0;
  std::optional<ObjectId> object;
  std::optional<std::string> anchor;
  std::optional<Pose2D> goal;
};

struct TouchRecord {
  Millis at = 0;
  SiteId site;
  ObjectId object;
  std::optional<ProxyId> proxy;
  double error = 0.0;
  bool ok = false;
};

struct ConflictRecord {
  Millis at = 0;
  ObjectId object;
  Authority winner;
  Authority loser;
};

struct QuiescentCheck {
  Millis at = 0;
  ObjectId object;
  double max_error = 0.0;
  bool ok = false;
};

struct Violation {
  Millis at = 0;
  std::string kind;
  std::string detail;
};

struct SimLog {
  std::vector<SetdownRecord> setdowns;
  std::vector<GestureRecord> gestures;
  std::vector<TouchRecord> touches;
  std::vector<ConflictRecord> conflicts;
  std::vector<QuiescentCheck> quiescent;
  std::vector<Violation> violations;
  std::int64_t illusion_breaks = 0;
  std::int64_t infeasible_plans = 0;
  std::int64_t blocked_plans = 0;
  std::int64_t replans = 0;
  std::int64_t reassignments = 0;
  std::int64_t handoffs = 0;
  std::int64_t unserviceable = 0;
  std::int64_t ignored_releases = 0;
  std::int64_t late_inputs = 0;
};

struct OutboundMessage {
  std::string msg_type;
  nlohmann::json payload;
};

/// The single writer of the world. Each advance() applies one tick of inputs,
/// re-evaluates bindings, replans and integrates proxies, releases delayed
/// remote views, checks the motion invariants and extends the digest chain.
class Simulation {
 public:
  Simulation(SimConfig config, std::vector<VirtualObject> objects, std::vector<RobotProxy> proxies,
             const std::vector<BindingSpec>& bindings);

  /// Inputs must carry timestamps no later than the end of this tick and
  /// strictly increasing per (site, user, frame kind); CorruptInput otherwise.
  /// Inputs older than the tick (held up in transit) are applied on arrival.
  const WorldState& advance(std::vector<SiteInput> inputs, std::optional<Millis> dt = std::nullopt);
  /// Closes the run: final quiescence checks for shared objects.
  void finish();

  const WorldState& state() const { return state_; }
  const SimLog& log() const { return log_; }
  const SimConfig& config() const { return config_; }
  const mapping::MappingEngine& mapping() const { return mapping_; }
  /// Chained SHA-256 over the canonical state of every tick so far.
  const std::string& digest() const { return digest_; }
  const SiteConfig& site(const SiteId& id) const;
  SiteFrame frame_of(const SiteId& id) const;
  void set_latency(const SiteId& site, Millis latency);
  std::optional<motion::MotionPlan> plan_of(const ProxyId& proxy) const;
  /// Messages generated since the last call (retarget tasks, binding changes,
  /// diagnostics, conflicts), in generation order.
  std::vector<OutboundMessage> take_outbox();

 private:
  struct Holder {
    SiteId site;
    UserId user;
    GraspMode mode = GraspMode::physical;
    std::optional<ProxyId> carried;
  };
  struct ObjectRuntime {
    std::optional<Holder> holder;
    retarget::SetdownPredictor predictor;
    /// Gesture command in progress: the proxy drives the object to `goal`.
    std::optional<ProxyId> driver;
    Pose2D command_goal;
    Millis hold_since = 0;
    /// Pose of each site's active proxy when the current hold began.
    std::map<SiteId, Pose2D> hold_start;
  };
  struct Goal {
    Pose2D pose;  // local frame
    bool heading_matters = false;
    std::optional<Millis> deadline;
    retarget::PredictionSource source = retarget::PredictionSource::snap_anchor;
    std::string reason;
  };
  struct ProxyRuntime {
    std::optional<motion::PlanProgress> progress;
    std::optional<retarget::RetargetTask> task;
    std::optional<Goal> goal;
    bool needs_plan = false;
    retarget::ReplanGate gate;
    Pose2D tick_start;
    bool carried_at_start = false;
  };

  void apply(const SiteInput& in, Millis now);
  void apply_hand(const SiteInput& in, Millis now);
  void apply_wrist(const SiteInput& in, Millis now);
  void apply_grasp(const SiteInput& in, Millis now);
  void apply_release(const SiteInput& in, Millis now);
  void update_focus(const SiteId& site, const UserId& user, Millis now);

  std::optional<Goal> desired_goal(const RobotProxy& proxy, Millis now) const;
  void evaluate_goals(Millis t0, Millis t1);
  void plan(RobotProxy& proxy, ProxyRuntime& rt, Millis t0);
  void execute(Millis dt);
  void update_states();
  std::optional<Pose2D> target_pose(const RobotProxy& proxy, bool* heading_matters) const;
  bool engaged_at(const RobotProxy& proxy, const Pose2D& target, bool heading_matters) const;
  void release_views(Millis now);
  void check_touches(const std::vector<SiteInput>& touches, Millis now);
  void check_invariants(Millis now, Millis dt);
  void quiescence_check(const ObjectId& object, Millis now);
  void push_remote(const SiteId& origin, const ObjectId& object, const Pose2D& pose, Millis ts, Millis received_at,
                   retarget::UpdateKind kind, std::uint64_t event_id = 0);
  void set_object_pose(const ObjectId& id, const Pose2D& pose, const SiteId& origin, Millis ts, Millis now);
  void cancel_motion(const ProxyId& proxy);
  void sync_snapshot();
  void emit(std::string msg_type, nlohmann::json payload);
  Pose2D contact_pose(const VirtualObject& wall, Vec2 hand_shared) const;
  std::optional<ProxyId> active_proxy(const ObjectId& object, const SiteId& site) const;

  SimConfig config_;
  WorldState state_;
  mapping::MappingEngine mapping_;
  std::map<SiteId, SiteConfig> sites_;
  std::map<SiteId, retarget::DelayBuffer> buffers_;
  std::map<ObjectId, ObjectRuntime> object_rt_;
  std::map<ProxyId, ProxyRuntime> proxy_rt_;
  std::map<std::pair<SiteId, UserId>, Pose2D> hands_;  // local frame
  std::map<std::pair<SiteId, UserId>, gesture::GestureRecognizer> recognizers_;
  std::map<std::tuple<SiteId, UserId, int>, Millis> last_frame_;
  /// Open set-down record per (object, viewer site).
  std::map<std::pair<ObjectId, SiteId>, std::size_t> open_setdowns_;
  SimLog log_;
  std::vector<OutboundMessage> outbox_;
  std::string digest_;
};

nlohmann::json to_json(const SetdownRecord& r);
nlohmann::json to_json(const GestureRecord& r);
nlohmann::json to_json(const TouchRecord& r);
nlohmann::json to_json(const ConflictRecord& r);
nlohmann::json to_json(const QuiescentCheck& r);
nlohmann::json to_json(const Violation& v);

}  // namespace physhare::sim
