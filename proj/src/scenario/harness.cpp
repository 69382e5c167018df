#include "physhare/scenario/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/json_codec.hpp"
#include "physhare/scenario/generators.hpp"

namespace physhare::scenario {

using nlohmann::json;

Percentiles percentiles(std::vector<Millis> samples) {
  Percentiles p;
  p.count = samples.size();
  if (samples.empty()) return p;
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(k, 1, samples.size()) - 1];
  };
  p.p50 = rank(0.50);
  p.p95 = rank(0.95);
  p.p99 = rank(0.99);
  p.max = samples.back();
  return p;
}

namespace {

template <typename T>
json nullable(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string site_client(const SiteId& s) { return "site-" + s; }

json frame_payload(const sim::SiteInput& in) {
  const char* part = in.kind == sim::InputKind::wrist ? "/wrist" : "/hand";
  return {{"subject_id", in.user + part}, {"pose", in.pose}, {"timestamp", in.timestamp}, {"site", in.site}};
}

json action_payload(const sim::SiteInput& in) {
  json j = {{"event", sim::to_string(in.kind)},
            {"site", in.site},
            {"user", in.user},
            {"object", in.object},
            {"pose", in.pose},
            {"timestamp", in.timestamp}};
  if (in.kind == sim::InputKind::grasp) j["mode"] = sim::to_string(in.mode);
  return j;
}

}  // namespace

json to_json(const RunMetrics& m) {
  json slack = json::array();
  for (const auto& s : m.slack) slack.push_back(nullable(s));
  return {
      {"scenario", m.scenario},
      {"parameters", to_json(m.parameters)},
      {"digest", m.digest},
      {"ticks", m.ticks},
      {"sim_time", m.sim_time},
      {"setdowns", m.setdowns},
      {"illusion_breaks", m.illusion_breaks},
      {"slack", {{"per_move", slack}, {"min", nullable(m.min_slack)}, {"mean", nullable(m.mean_slack)}}},
      {"reassignments", m.reassignments},
      {"handoffs", m.handoffs},
      {"unserviceable", m.unserviceable},
      {"replans", m.replans},
      {"infeasible_plans", m.infeasible_plans},
      {"blocked_plans", m.blocked_plans},
      {"late_inputs", m.late_inputs},
      {"ignored_releases", m.ignored_releases},
      {"gestures",
       {{"expected", m.gestures_expected},
        {"correct", m.gestures_correct},
        {"accuracy", nullable(m.gesture_accuracy)}}},
      {"touches", {{"total", m.touches}, {"misses", m.touch_misses}, {"max_error", m.max_touch_error}}},
      {"conflicts", m.conflicts},
      {"quiescent",
       {{"checks", m.quiescent_checks}, {"failures", m.quiescent_failures}, {"max_error", m.max_quiescent_error}}},
      {"violations", m.violations},
      {"ui_commands", {{"accepted", m.ui_commands}, {"rejected", m.rejected_ui_commands}}},
      {"relay_latency",
       {{"count", m.relay_latency.count},
        {"p50", m.relay_latency.p50},
        {"p95", m.relay_latency.p95},
        {"p99", m.relay_latency.p99},
        {"max", m.relay_latency.max}}},
  };
}

// ------------------------------------------------------------------ run

struct ScenarioRun::Impl {
  explicit Impl(ScenarioScript s)
      : script(std::move(s)),
        ns(script.name),
        relay(clock, relay::Relay::Options{true, false, script.parameters.seed}),
        simulation(make_config(script), script.objects, script.proxies, script.bindings),
        inputs(expand(script)) {
    if (script.parameters.relay_delay > 0 || script.parameters.relay_jitter > 0) {
      relay.inject_latency(ns, script.parameters.relay_delay, script.parameters.relay_jitter);
    }
    for (const auto& site : script.sites) {
      relay.register_client({site_client(site.id), {ns}, relay::Role::emitter, site.id}, nullptr);
      seq[site_client(site.id)] = 0;
    }
    relay.register_client({kSimClient, {ns}, relay::Role::both, ""}, [this](const relay::Delivery& d) {
      std::lock_guard lock(inbox_mu);
      inbox.push_back(d.message);
    });
    publish_outbox();
  }

  static sim::SimConfig make_config(const ScenarioScript& s) {
    sim::SimConfig c;
    c.workspace = s.workspace;
    c.sites = s.sites;
    for (auto& site : c.sites) site.artificial_latency = s.parameters.artificial_latency;
    c.hand_speed = s.parameters.hand_speed;
    return c;
  }

  void publish(const std::string& client, const std::string& msg_type, json payload) {
    relay::RelayMessage m{ns, client, msg_type, ++seq[client], clock.now(), std::move(payload)};
    const auto r = relay.publish(client, m);
    if (const auto* f = std::get_if<relay::Fault>(&r)) {
      throw Error("relay refused " + msg_type + " from " + client + ": " + f->reason);
    }
  }

  void publish_outbox() {
    for (auto& m : simulation.take_outbox()) publish(kSimClient, m.msg_type, std::move(m.payload));
  }

  const sim::SiteConfig* site_of(const std::string& id) const {
    for (const auto& s : script.sites) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }

  // Site traffic becomes simulation input; UI commands are turned into the
  // equivalent site input at the current tick.
  void translate(const relay::RelayMessage& m, Millis t1, std::vector<sim::SiteInput>& out,
                 std::map<SiteId, sim::SiteInput>& drags) {
    const json& p = m.payload;
    if (m.msg_type == "frame") {
      const auto subject = p.at("subject_id").get<std::string>();
      const auto slash = subject.rfind('/');
      sim::SiteInput in;
      in.kind = subject.substr(slash + 1) == "wrist" ? sim::InputKind::wrist : sim::InputKind::hand;
      in.site = p.at("site").get<std::string>();
      in.user = subject.substr(0, slash);
      in.pose = p.at("pose").get<Pose2D>();
      in.timestamp = p.at("timestamp").get<Millis>();
      out.push_back(std::move(in));
      return;
    }
    if (m.msg_type == "scenario-event") {
      const auto ev = p.at("event").get<std::string>();
      sim::SiteInput in;
      if (ev == "grasp") {
        in.kind = sim::InputKind::grasp;
        in.mode = sim::grasp_mode_from_string(p.value("mode", std::string("physical")));
      } else if (ev == "release") {
        in.kind = sim::InputKind::release;
      } else if (ev == "touch") {
        in.kind = sim::InputKind::touch;
      } else {
        return;
      }
      in.site = p.at("site").get<std::string>();
      in.user = p.at("user").get<std::string>();
      in.object = p.at("object").get<std::string>();
      in.pose = p.at("pose").get<Pose2D>();
      in.timestamp = p.at("timestamp").get<Millis>();
      out.push_back(std::move(in));
      return;
    }
    if (m.msg_type != "ui-command") return;
    if (!relay::payload_error(m.msg_type, p).empty()) {
      ++rejected_ui;
      return;
    }
    const auto kind = p.at("kind").get<std::string>();
    if (kind == "set-latency") {
      const Millis latency = p.value("latency", Millis{-1});
      if (latency < 0) {
        ++rejected_ui;
        return;
      }
      for (const auto& s : script.sites) {
        if (!p.contains("site") || p.at("site") == s.id) simulation.set_latency(s.id, latency);
      }
      ++accepted_ui;
      return;
    }
    if (kind == "toggle-layer") {
      ++accepted_ui;
      return;
    }
    const auto* site = site_of(p.value("site", std::string{}));
    if (site == nullptr) {
      ++rejected_ui;
      return;
    }
    try {
      sim::SiteInput in;
      in.site = site->id;
      in.user = site->user;
      in.timestamp = t1;
      if (kind == "drag") {
        in.kind = sim::InputKind::hand;
        in.pose = p.at("pose").get<Pose2D>();
        drags[site->id] = in;
      } else if (kind == "grasp" || kind == "release") {
        in.kind = kind == "grasp" ? sim::InputKind::grasp : sim::InputKind::release;
        in.object = p.at("object").get<std::string>();
        if (!simulation.state().objects.contains(in.object)) {
          ++rejected_ui;
          return;
        }
        in.mode = sim::grasp_mode_from_string(p.value("mode", std::string("virtual")));
        if (p.contains("pose")) in.pose = p.at("pose").get<Pose2D>();
        out.push_back(in);
      } else if (kind == "gesture") {
        Millis last = std::numeric_limits<Millis>::min();
        for (const auto& s : p.at("samples")) {
          const Millis off = s.at("offset").get<Millis>();
          if (off <= last || off < 0) throw CorruptInput("gesture samples must have increasing offsets");
          last = off;
          in.kind = sim::InputKind::wrist;
          in.pose = s.at("pose").get<Pose2D>();
          in.timestamp = t1 + off;
          ui_wrist.push_back(in);
        }
      }
      ++accepted_ui;
    } catch (const std::exception&) {
      ++rejected_ui;
    }
  }

  void step() {
    const Millis dt = simulation.config().dt;
    const Millis t1 = now + dt;
    clock.set(t1);
    while (next < inputs.size() && inputs[next].input.timestamp <= t1) {
      const auto& in = inputs[next].input;
      const bool frame = in.kind == sim::InputKind::hand || in.kind == sim::InputKind::wrist;
      publish(site_client(in.site), frame ? "frame" : "scenario-event", frame ? frame_payload(in) : action_payload(in));
      ++next;
    }
    relay.pump();
    std::vector<relay::RelayMessage> messages;
    {
      std::lock_guard lock(inbox_mu);
      messages.swap(inbox);
    }
    std::vector<sim::SiteInput> batch;
    std::map<SiteId, sim::SiteInput> drags;
    for (const auto& m : messages) translate(m, t1, batch, drags);
    for (auto& [s, in] : drags) batch.push_back(std::move(in));
    std::stable_sort(ui_wrist.begin(), ui_wrist.end(),
                     [](const sim::SiteInput& a, const sim::SiteInput& b) { return a.timestamp < b.timestamp; });
    auto due = std::find_if(ui_wrist.begin(), ui_wrist.end(), [&](const sim::SiteInput& in) { return in.timestamp > t1; });
    batch.insert(batch.end(), ui_wrist.begin(), due);
    ui_wrist.erase(ui_wrist.begin(), due);
    simulation.advance(std::move(batch), dt);
    publish_outbox();
    now = t1;
  }

  relay::SimClock clock;
  ScenarioScript script;
  std::string ns;
  relay::Relay relay;
  sim::Simulation simulation;
  std::vector<TimedInput> inputs;
  std::size_t next = 0;
  Millis now = 0;
  std::map<std::string, std::uint64_t> seq;
  std::mutex inbox_mu;
  std::vector<relay::RelayMessage> inbox;
  std::vector<sim::SiteInput> ui_wrist;
  std::int64_t accepted_ui = 0;
  std::int64_t rejected_ui = 0;
  bool finished = false;
};

ScenarioRun::ScenarioRun(ScenarioScript script) {
  if (auto problems = validate(script); !problems.empty()) throw ScriptError(std::move(problems));
  impl_ = std::make_unique<Impl>(std::move(script));
}

ScenarioRun::~ScenarioRun() = default;

bool ScenarioRun::done() const { return impl_->now >= impl_->script.duration; }

void ScenarioRun::step() {
  if (impl_->finished) throw ContractViolation("run already finished");
  impl_->step();
}

Millis ScenarioRun::now() const { return impl_->now; }
const ScenarioScript& ScenarioRun::script() const { return impl_->script; }
const sim::Simulation& ScenarioRun::simulation() const { return impl_->simulation; }
const std::string& ScenarioRun::ns() const { return impl_->ns; }
relay::Relay& ScenarioRun::relay() { return impl_->relay; }

namespace {

std::vector<GestureOutcome> score_gestures(const ScenarioScript& s, const sim::SimLog& log) {
  std::vector<const ScriptEvent*> injections;
  for (const auto& e : s.events) {
    if (e.type == EventType::gesture_injection && e.expect) injections.push_back(&e);
  }
  std::stable_sort(injections.begin(), injections.end(),
                   [](const ScriptEvent* a, const ScriptEvent* b) { return a->t < b->t; });
  std::vector<GestureOutcome> out;
  for (std::size_t i = 0; i < injections.size(); ++i) {
    const auto& e = *injections[i];
    const Millis from = e.t;
    const Millis until = i + 1 < injections.size() ? injections[i + 1]->t : std::numeric_limits<Millis>::max();
    GestureOutcome g;
    g.injected_at = from;
    g.expected = *e.expect;
    for (const auto& r : log.gestures) {
      if (r.at <= from || r.at > until || r.site != e.site || r.user != e.user) continue;
      if (!g.observed) g.observed = r;
      ++g.recognised;
    }
    if (!g.expected.kind) {
      g.correct = g.recognised == 0;
    } else {
      const auto& o = g.observed;
      g.correct = g.recognised == 1 && o->kind == *g.expected.kind &&
                  (!g.expected.object || o->object == g.expected.object) &&
                  (!g.expected.anchor || o->anchor == g.expected.anchor);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

RunResult ScenarioRun::finish() {
  while (!done()) step();
  auto& im = *impl_;
  if (!im.finished) {
    im.simulation.finish();
    im.publish_outbox();
    im.relay.pump();
    im.finished = true;
  }
  const auto& log = im.simulation.log();
  RunResult r;
  r.log = log;
  r.final_state = im.simulation.state();
  r.gestures = score_gestures(im.script, log);

  RunMetrics& m = r.metrics;
  m.scenario = im.script.name;
  m.parameters = im.script.parameters;
  m.digest = im.simulation.digest();
  m.ticks = im.simulation.state().tick;
  m.sim_time = im.simulation.state().sim_time;
  m.setdowns = static_cast<std::int64_t>(log.setdowns.size());
  m.illusion_breaks = log.illusion_breaks;
  std::int64_t sum = 0;
  std::int64_t n = 0;
  for (const auto& rec : log.setdowns) {
    const auto s = rec.slack();
    m.slack.push_back(s);
    if (!s) continue;
    m.min_slack = m.min_slack ? std::min(*m.min_slack, *s) : *s;
    sum += *s;
    ++n;
  }
  if (n > 0) m.mean_slack = static_cast<double>(sum) / static_cast<double>(n);
  m.reassignments = log.reassignments;
  m.handoffs = log.handoffs;
  m.unserviceable = log.unserviceable;
  m.replans = log.replans;
  m.infeasible_plans = log.infeasible_plans;
  m.blocked_plans = log.blocked_plans;
  m.late_inputs = log.late_inputs;
  m.ignored_releases = log.ignored_releases;
  m.gestures_expected = static_cast<std::int64_t>(r.gestures.size());
  m.gestures_correct = std::count_if(r.gestures.begin(), r.gestures.end(), [](const auto& g) { return g.correct; });
  if (m.gestures_expected > 0) {
    m.gesture_accuracy = static_cast<double>(m.gestures_correct) / static_cast<double>(m.gestures_expected);
  }
  m.touches = static_cast<std::int64_t>(log.touches.size());
  for (const auto& t : log.touches) {
    if (!t.ok) ++m.touch_misses;
    m.max_touch_error = std::max(m.max_touch_error, t.error);
  }
  m.conflicts = static_cast<std::int64_t>(log.conflicts.size());
  m.quiescent_checks = static_cast<std::int64_t>(log.quiescent.size());
  for (const auto& q : log.quiescent) {
    if (!q.ok) ++m.quiescent_failures;
    m.max_quiescent_error = std::max(m.max_quiescent_error, q.max_error);
  }
  for (const char* kind : {"speed", "turn-rate", "clearance", "exclusivity"}) m.violations[kind] = 0;
  for (const auto& v : log.violations) ++m.violations[v.kind];
  m.ui_commands = im.accepted_ui;
  m.rejected_ui_commands = im.rejected_ui;
  m.relay_latency = percentiles(im.relay.delivery_latencies());
  return r;
}

RunResult run_scenario(const ScenarioScript& script) {
  ScenarioRun run(script);
  return run.finish();
}

// ------------------------------------------------------------------ sweep and export

std::vector<SweepRow> sweep(const ScenarioScript& script, std::string_view parameter, const std::vector<double>& values) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    const auto s = build_script(script.name, with_parameter(script.parameters, parameter, v));
    rows.push_back({v, run_scenario(s).metrics});
  }
  return rows;
}

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(6);
    os << v.get<double>();
    return os.str();
  }
  return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else if (!it->is_array()) {
      out.emplace_back(key, *it);
    }
  }
}

}  // namespace

std::string sweep_csv(std::string_view parameter, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "parameter,value,illusion_breaks,min_slack_ms,mean_slack_ms,reassignments,gesture_accuracy,touch_misses,"
        "conflicts,relay_p50_ms,relay_p95_ms,relay_p99_ms,digest\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << parameter << ',' << cell(json(r.value)) << ',' << m.illusion_breaks << ',' << cell(nullable(m.min_slack))
       << ',' << cell(nullable(m.mean_slack)) << ',' << m.reassignments << ',' << cell(nullable(m.gesture_accuracy))
       << ',' << m.touch_misses << ',' << m.conflicts << ',' << m.relay_latency.p50 << ',' << m.relay_latency.p95
       << ',' << m.relay_latency.p99 << ',' << m.digest << '\n';
  }
  return os.str();
}

std::string metrics_csv(const json& metrics) {
  if (!metrics.is_object()) throw CorruptInput("metrics must be a JSON object");
  std::vector<std::pair<std::string, json>> fields;
  flatten(metrics, "", fields);
  std::ostringstream head;
  std::ostringstream row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      head << ',';
      row << ',';
    }
    head << fields[i].first;
    row << cell(fields[i].second);
  }
  return head.str() + "\n" + row.str() + "\n";
}

std::string setdowns_csv(const sim::SimLog& log) {
  std::ostringstream os;
  os << "id,object,holder_site,site,proxy,grasp_at,release_at,deadline,arrival,display,slack_ms,illusion_break\n";
  for (const auto& r : log.setdowns) {
    os << r.id << ',' << r.object << ',' << r.holder_site << ',' << r.site << ',' << r.proxy << ',' << r.grasp_at
       << ',' << cell(nullable(r.release_at)) << ',' << cell(nullable(r.deadline)) << ',' << cell(nullable(r.arrival))
       << ',' << cell(nullable(r.display)) << ',' << cell(nullable(r.slack())) << ','
       << (r.illusion_break ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace physhare::scenario
