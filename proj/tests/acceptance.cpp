// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Each check recomputes its expectation here rather
// than trusting the library's own counters.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "physhare/gesture/gesture.hpp"
#include "physhare/mapping/mapping_engine.hpp"
#include "physhare/relay/relay.hpp"
#include "physhare/scenario/generators.hpp"
#include "physhare/scenario/harness.hpp"

using namespace physhare;
using nlohmann::json;

namespace {

constexpr double kHandSpeed = 0.3;
constexpr double kRobotSpeed = 0.25;
constexpr double kRobotTurn = kPi;
constexpr Millis kLatency = 1500;
constexpr Millis kSlackTolerance = 20;
constexpr double kConvergence = 0.01;
constexpr double kSlop = 1e-9;

int failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", n, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string scenario_path(const std::string& name) { return std::string(PHYSHARE_SCENARIO_DIR) + "/" + name + ".json"; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Time for the remote proxy to face its line of travel, either way round.
double turn_seconds(const Pose2D& start, const Pose2D& goal) {
  if (distance(start, goal) < 1e-9) return 0.0;
  const double bearing = (goal.position() - start.position()).angle();
  const double d = std::abs(heading_delta(start.heading(), bearing));
  return std::min(d, kPi - d) / kRobotTurn;
}

// Latency a single move needs for the proxy to arrive before the display.
double required_latency(const sim::SetdownRecord& r) {
  const double d = distance(r.start_pose, r.goal);
  return turn_seconds(r.start_pose, r.goal) + d / kRobotSpeed - d / kHandSpeed;
}

Millis analytic_slack(const sim::SetdownRecord& r, Millis latency) {
  return static_cast<Millis>(std::llround((static_cast<double>(latency) / 1000.0 - required_latency(r)) * 1000.0));
}

// ------------------------------------------------------------------ stepped runs

struct SteppedRun {
  scenario::RunResult result;
  double seconds = 0.0;
  std::int64_t ticks = 0;
  std::vector<std::string> motion_problems;
  std::size_t motion_problem_count = 0;
  // World state just before each requested time.
  std::map<Millis, WorldState> snapshots;
};

// Steps a checked-in script tick by tick, checking the speed law for every
// proxy nobody is carrying and pairwise clearance at each site.
SteppedRun stepped(const scenario::ScenarioScript& script, const std::set<Millis>& snapshot_at = {}) {
  SteppedRun out;
  const auto t0 = std::chrono::steady_clock::now();
  scenario::ScenarioRun run(script);
  std::map<ProxyId, RobotProxy> before = run.simulation().state().proxies;
  auto problem = [&](const std::string& what) {
    if (out.motion_problems.size() < 5) out.motion_problems.push_back(what);
    ++out.motion_problem_count;
  };
  while (!run.done()) {
    const Millis prev = run.now();
    run.step();
    ++out.ticks;
    const Millis now = run.now();
    const double dt = static_cast<double>(now - prev) / 1000.0;
    const auto& state = run.simulation().state();
    for (const auto& [id, p] : state.proxies) {
      const auto& b = before.at(id);
      if (p.carried_by || b.carried_by) continue;
      const double moved = distance(b.pose, p.pose);
      const double turned = std::abs(heading_delta(b.pose.heading(), p.pose.heading()));
      if (moved > p.profile.max_linear_speed * dt + kSlop) {
        problem(id + " moved " + std::to_string(moved) + " m at " + std::to_string(now));
      }
      if (turned > p.profile.max_angular_speed * dt + kSlop) {
        problem(id + " turned " + std::to_string(turned) + " rad at " + std::to_string(now));
      }
    }
    for (auto a = state.proxies.begin(); a != state.proxies.end(); ++a) {
      for (auto c = std::next(a); c != state.proxies.end(); ++c) {
        if (a->second.site != c->second.site) continue;
        const double need = a->second.profile.footprint_radius + c->second.profile.footprint_radius;
        if (distance(a->second.pose, c->second.pose) < need - kSlop) {
          problem(a->first + "/" + c->first + " overlap at " + std::to_string(now));
        }
      }
    }
    // State as it stands just before inputs stamped in the next tick apply.
    for (auto t = snapshot_at.upper_bound(now); t != snapshot_at.end() && *t <= now + (now - prev); ++t) {
      out.snapshots[*t] = state;
    }
    if (run.done()) out.snapshots[script.duration] = state;
    before = state.proxies;
  }
  out.result = run.finish();
  out.seconds = seconds_since(t0);
  return out;
}

// ------------------------------------------------------------------ criteria

void latency_budget(const SteppedRun& run) {
  const auto& log = run.result.log;
  std::int64_t breaks = 0;
  Millis min_slack = std::numeric_limits<Millis>::max();
  Millis worst_dev = 0;
  std::size_t complete = 0;
  for (const auto& r : log.setdowns) {
    breaks += r.illusion_break;
    if (!r.slack()) continue;
    ++complete;
    min_slack = std::min(min_slack, *r.slack());
    worst_dev = std::max(worst_dev, std::abs(*r.slack() - analytic_slack(r, kLatency)));
  }
  const bool ok = log.setdowns.size() == 81 && complete == 81 && breaks == 0 && min_slack > 0 &&
                  worst_dev <= kSlackTolerance && run.seconds < 30.0;
  std::ostringstream d;
  d << log.setdowns.size() << " set-downs, " << breaks << " breaks, min slack " << min_slack
    << " ms, max |slack - analytic| " << worst_dev << " ms (tolerance " << kSlackTolerance << "), runtime "
    << std::fixed;
  d.precision(2);
  d << run.seconds << " s";
  report(1, "latency budget (tictactoe, L=1500)", ok, d.str());
}

void latency_sweep(const scenario::ScenarioScript& script, const SteppedRun& reference) {
  const std::vector<double> values = {0, 500, 1000, 1500, 2000};
  const auto rows = scenario::sweep(script, "artificial_latency", values);
  double bound = 0.0;
  for (const auto& r : reference.result.log.setdowns) bound = std::max(bound, required_latency(r));
  const Millis bound_ms = static_cast<Millis>(std::llround(bound * 1000.0));
  bool monotone = true;
  std::optional<Millis> threshold;
  std::ostringstream d;
  d << "breaks";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto b = rows[i].metrics.illusion_breaks;
    d << (i ? "," : " ") << b;
    if (i > 0 && b > rows[i - 1].metrics.illusion_breaks) monotone = false;
    if (b == 0 && !threshold) threshold = static_cast<Millis>(values[i]);
  }
  const bool ok = monotone && threshold && std::abs(*threshold - bound_ms) <= 500;
  d << " at L=0,500,1000,1500,2000; zero-break threshold "
    << (threshold ? std::to_string(*threshold) + " ms" : std::string("none")) << ", analytic bound " << bound_ms
    << " ms";
  report(2, "latency sweep", ok, d.str());
}

void dispatch_oracle() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> grid(0, 18);
  std::uniform_real_distribution<double> coord(0.0, 0.9);
  std::uniform_int_distribution<int> count(1, 10);
  std::bernoulli_distribution coin(0.25);
  int matched = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    // Every other instance sits on a 5 cm grid so exact ties are common.
    const bool on_grid = trial % 2 == 0;
    auto sample = [&] { return on_grid ? Vec2{grid(rng) * 0.05, grid(rng) * 0.05} : Vec2{coord(rng), coord(rng)}; };
    WorldState w;
    w.objects["obj"] = {"obj", Pose2D(0.45, 0.45), std::nullopt, VisualKind::building, 0.0};
    std::vector<ProxyId> pool;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(rng() % 50);
      if (w.proxies.count(id)) continue;
      RobotProxy r{id, coin(rng) ? "b" : "a", KinematicProfile::tabletop(), Pose2D(sample()), ProxyState::idle,
                   std::nullopt};
      if (coin(rng)) r.carried_by = "u";
      w.proxies[id] = r;
      pool.push_back(id);
    }
    const Vec2 focus = sample();
    mapping::MappingEngine m;
    const auto bid = m.bind_one_to_many(w, {"obj"}, pool).id;
    const auto got = m.dispatch_nearest(bid, focus, "a", w.proxies, "obj");

    std::optional<ProxyId> best;
    double best_d2 = 0.0;
    for (const auto& id : pool) {
      const auto& p = w.proxies.at(id);
      if (p.site != "a" || p.carried_by) continue;
      double d2;
      if (on_grid) {
        const auto dx = std::lround(p.pose.x() / 0.05) - std::lround(focus.x / 0.05);
        const auto dy = std::lround(p.pose.y() / 0.05) - std::lround(focus.y / 0.05);
        d2 = static_cast<double>(dx * dx + dy * dy);
      } else {
        d2 = std::pow(p.pose.x() - focus.x, 2) + std::pow(p.pose.y() - focus.y, 2);
      }
      if (!best || d2 < best_d2 || (d2 == best_d2 && id < *best)) {
        best = id;
        best_d2 = d2;
      }
    }
    const auto* dispatch = std::get_if<mapping::Dispatch>(&got);
    if ((!best && !dispatch) || (best && dispatch && dispatch->proxy == *best)) ++matched;
  }
  report(3, "nearest-proxy dispatch", matched == trials,
         std::to_string(matched) + "/" + std::to_string(trials) + " instances equal the brute-force argmin");
}

void relay_contract() {
  using namespace relay;
  SimClock clock;
  Relay relay(clock, Relay::Options{true, false, 7});
  relay.inject_latency("room", 40, 35);
  std::mt19937_64 rng(99);
  const std::vector<std::string> emitters = {"e1", "e2"};
  constexpr std::uint64_t kPerEmitter = 10000;

  struct Session {
    std::map<std::string, std::uint64_t> last;
    std::map<std::pair<std::string, std::string>, std::uint64_t> snapshot;
    std::map<std::pair<std::string, std::string>, std::uint64_t> expected_snapshot;
    bool live_started = false;
    std::string problem;
    bool late = false;
  };
  // Latest accepted seq per (emitter, msg_type): what a joiner's snapshot must hold.
  std::map<std::pair<std::string, std::string>, std::uint64_t> retained;
  std::map<std::string, std::vector<Session>> sessions;
  std::uint64_t delivered = 0;
  auto sink_for = [&](const std::string& id, bool late) {
    sessions[id].emplace_back();
    sessions[id].back().late = late;
    sessions[id].back().expected_snapshot = retained;
    const std::size_t idx = sessions[id].size() - 1;
    return Sink([&, id, idx](const Delivery& d) {
      Session& s = sessions[id][idx];
      auto& last = s.last[d.message.emitter_id];
      if (d.snapshot) {
        if (s.live_started && s.problem.empty()) s.problem = "snapshot after live traffic";
        s.snapshot[{d.message.emitter_id, d.message.msg_type}] = d.message.seq;
        last = std::max(last, d.message.seq);
        return;
      }
      ++delivered;
      s.live_started = true;
      if (d.message.seq != last + 1 && s.problem.empty()) {
        s.problem = d.message.emitter_id + " expected seq " + std::to_string(last + 1) + " got " +
                    std::to_string(d.message.seq);
      }
      last = d.message.seq;
    });
  };
  auto reg = [](const std::string& id, Role role) { return ClientRegistration{id, {"room"}, role, "x"}; };

  relay.register_client(reg("steady", Role::sink), sink_for("steady", false));
  const std::vector<std::string> flaky = {"f1", "f2", "f3", "f4"};
  std::map<std::string, std::uint64_t> next_seq;
  for (const auto& e : emitters) {
    relay.register_client(reg(e, Role::emitter), nullptr);
    next_seq[e] = 1;
  }
  std::uint64_t faults = 0;
  std::uniform_int_distribution<int> pick(0, 999);
  while (next_seq["e1"] <= kPerEmitter || next_seq["e2"] <= kPerEmitter) {
    const int roll = pick(rng);
    if (roll < 700) {
      const auto& e = emitters[roll % 2];
      if (next_seq[e] <= kPerEmitter && relay.connected(e)) {
        const RelayMessage m{"room", e, roll % 3 ? "frame" : "scenario-event", next_seq[e], clock.now(),
                             {{"n", next_seq[e]}}};
        if (std::holds_alternative<Ack>(relay.publish(e, m))) {
          retained[{e, m.msg_type}] = m.seq;
          ++next_seq[e];
        } else {
          ++faults;
        }
      }
    } else if (roll < 900) {
      clock.advance(pick(rng) % 25);
      relay.pump();
    } else if (roll < 980) {
      const auto& f = flaky[roll % flaky.size()];
      if (relay.connected(f)) {
        relay.disconnect(f);
      } else {
        relay.register_client(reg(f, Role::sink), sink_for(f, true));
      }
    } else {
      const auto& e = emitters[roll % 2];
      if (relay.connected(e)) {
        relay.disconnect(e);
      } else if (relay.register_client(reg(e, Role::emitter), nullptr).last_seq.at("room") + 1 != next_seq[e]) {
        ++faults;
      }
    }
  }
  clock.advance(1000);
  relay.pump();

  std::size_t session_count = 0;
  std::size_t bad = 0;
  std::size_t late_with_snapshot = 0;
  std::size_t late_total = 0;
  std::string first_problem;
  for (const auto& [id, list] : sessions) {
    for (const auto& s : list) {
      ++session_count;
      if (!s.problem.empty()) {
        ++bad;
        if (first_problem.empty()) first_problem = id + ": " + s.problem;
      }
      if (s.late) {
        ++late_total;
        late_with_snapshot += s.snapshot == s.expected_snapshot;
      }
    }
  }
  const auto& steady = sessions["steady"][0];
  const bool steady_complete = steady.last.size() == 2 && steady.last.at("e1") == kPerEmitter &&
                               steady.last.at("e2") == kPerEmitter && steady.problem.empty();
  const bool ok = bad == 0 && faults == 0 && steady_complete && late_with_snapshot == late_total && late_total > 0;
  std::ostringstream d;
  d << "2x" << kPerEmitter << " messages, " << session_count << " sink sessions (" << late_total
    << " late joins, all given the full retained snapshot first: " << (late_with_snapshot == late_total ? "yes" : "no") << "), "
    << delivered << " live deliveries, FIFO/exactly-once violations " << bad << ", faults " << faults;
  if (!first_problem.empty()) d << " (" << first_problem << ")";
  report(4, "relay contract", ok, d.str());
}

void many_to_one(const scenario::ScenarioScript& script, const SteppedRun& run) {
  // Races are consecutive pairs of grasp events, one per site.
  std::vector<std::pair<const scenario::ScriptEvent*, const scenario::ScriptEvent*>> races;
  std::vector<const scenario::ScriptEvent*> strikes;
  const scenario::ScriptEvent* pending = nullptr;
  for (const auto& e : script.events) {
    if (e.type == scenario::EventType::grasp) {
      if (pending) {
        races.emplace_back(pending, &e);
        pending = nullptr;
      } else {
        pending = &e;
      }
    }
    if (e.type == scenario::EventType::hand_path) strikes.push_back(&e);
  }
  const auto& conflicts = run.result.log.conflicts;
  int correct = 0;
  for (std::size_t i = 0; i < races.size() && i < conflicts.size(); ++i) {
    const auto* a = races[i].first;
    const auto* b = races[i].second;
    const auto* early = (a->t < b->t || (a->t == b->t && a->site < b->site)) ? a : b;
    if (conflicts[i].winner.site == early->site && conflicts[i].winner.grasped_at == early->t) ++correct;
  }

  // End of each quiescent period: just before the next race starts, and the end of the run.
  std::size_t checks = 0;
  std::size_t within = 0;
  double worst = 0.0;
  std::size_t strike_ok = 0;
  for (std::size_t i = 0; i < races.size(); ++i) {
    const Millis at = i + 1 < races.size() ? std::min(races[i + 1].first->t, races[i + 1].second->t) : script.duration;
    auto snap = run.snapshots.find(at);
    if (snap == run.snapshots.end()) continue;
    const auto& state = snap->second;
    const Pose2D shared = state.objects.at("mug").pose;
    for (const auto& [id, p] : state.proxies) {
      const auto& site = *std::find_if(script.sites.begin(), script.sites.end(),
                                       [&](const sim::SiteConfig& s) { return s.id == p.site; });
      const SiteFrame f{site.mirrored, script.workspace.width(), script.workspace.depth()};
      const double err = distance(f.to_shared(p.pose), shared);
      worst = std::max(worst, err);
      ++checks;
      within += err <= kConvergence;
    }
    // The mug must end where the winner's hand put it.
    if (i < strikes.size()) {
      const auto& s = *strikes[i];
      const auto& site = *std::find_if(script.sites.begin(), script.sites.end(),
                                       [&](const sim::SiteConfig& c) { return c.id == s.site; });
      const SiteFrame f{site.mirrored, script.workspace.width(), script.workspace.depth()};
      strike_ok += distance(f.to_shared(Pose2D(s.waypoints.back())), shared) <= 1e-6;
    }
  }
  const bool ok = races.size() == 100 && conflicts.size() == 100 && correct == 100 && checks == 2 * races.size() &&
                  within == checks && strike_ok == races.size();
  std::ostringstream d;
  d << correct << "/" << races.size() << " races won by the earlier grasp (" << conflicts.size()
    << " conflicts logged), " << within << "/" << checks << " end-of-quiescence proxy checks within 1 cm (worst "
    << std::fixed;
  d.precision(4);
  d << worst << " m), mug at winner's set-down " << strike_ok << "/" << races.size();
  report(5, "many-to-one convergence (clink-mugs)", ok, d.str());
}

void motion_safety(const std::map<std::string, SteppedRun>& runs) {
  std::ostringstream d;
  bool ok = true;
  std::int64_t ticks = 0;
  std::size_t problems = 0;
  std::string first;
  for (const auto& [name, run] : runs) {
    ticks += run.ticks;
    problems += run.motion_problem_count;
    std::int64_t internal = 0;
    for (const auto& [kind, n] : run.result.metrics.violations) internal += n;
    problems += static_cast<std::size_t>(internal);
    if (first.empty() && !run.motion_problems.empty()) first = name + ": " + run.motion_problems.front();
    if (run.motion_problem_count || internal) ok = false;
  }
  d << runs.size() << " scenarios, " << ticks << " ticks checked, " << problems << " speed/turn/clearance violations";
  if (!first.empty()) d << " (" << first << ")";
  report(6, "motion safety", ok && runs.size() == scenario::kScenarioNames.size(), d.str());
}

std::string nearest_anchor(const Workspace& w, Vec2 p) {
  std::string best;
  double best_d = 1e9;
  for (const auto& a : w.anchors()) {
    const double d = distance(a.pose.position(), p);
    if (d < best_d) {
      best_d = d;
      best = a.name;
    }
  }
  return best_d <= kConvergence ? best : std::string("none");
}

void gestures(const scenario::ScenarioScript& script, const SteppedRun& run) {
  const auto corpus = read_json(std::string(PHYSHARE_TEST_DATA) + "/gesture_corpus.json").at("trajectories");
  int corpus_ok = 0;
  for (const auto& tr : corpus) {
    gesture::GestureRecognizer rec;
    std::vector<gesture::GestureEvent> events;
    for (const auto& s : tr.at("samples")) {
      const gesture::WristSample w{
          "u", Pose2D(s.at("x").get<double>(), s.at("y").get<double>(), s.at("heading").get<double>()),
          s.at("t").get<Millis>()};
      if (auto e = rec.feed(w)) events.push_back(*e);
    }
    const auto label = tr.at("label").get<std::string>();
    corpus_ok += label == "none" ? events.empty() : events.size() == 1 && gesture::to_string(events[0].kind) == label;
  }

  // Area rules on the 3x3 table, user at the near edge: far row pulls toward
  // the user, middle row pushes away, near row slides sideways.
  auto expected_for = [](int tile) -> std::pair<std::string, int> {
    const int row = (tile - 1) / 3;
    const int col = (tile - 1) % 3;
    if (row == 0) return {"pull", 7 + col};
    if (row == 1) return {"push", 1 + col};
    return {"slide", tile == 9 ? 8 : tile + 1};
  };
  std::vector<const scenario::ScriptEvent*> injections;
  for (const auto& e : script.events) {
    if (e.type == scenario::EventType::gesture_injection) injections.push_back(&e);
  }
  int areas_ok = 0;
  std::set<int> areas;
  std::string first_miss;
  for (std::size_t i = 0; i < injections.size(); ++i) {
    const Millis t = injections[i]->t;
    Millis next = script.duration;
    for (const auto& e : script.events) {
      if (e.t > t && (e.type == scenario::EventType::grasp || e.type == scenario::EventType::gesture_injection)) {
        next = std::min(next, e.t);
      }
    }
    const auto before = run.snapshots.find(t);
    const auto after = run.snapshots.find(next);
    if (before == run.snapshots.end() || after == run.snapshots.end()) continue;
    const auto start = nearest_anchor(script.workspace, before->second.objects.at("mug").pose.position());
    if (start == "none") continue;
    const int tile = std::stoi(start.substr(5));
    areas.insert(tile);
    const auto [kind, goal] = expected_for(tile);
    const auto& outcome = run.result.gestures.at(i);
    const bool kind_ok = outcome.observed && gesture::to_string(outcome.observed->kind) == kind &&
                         outcome.recognised == 1;
    const auto end = nearest_anchor(script.workspace, after->second.objects.at("mug").pose.position());
    const bool placed = end == "tile-" + std::to_string(goal);
    if (kind_ok && placed) {
      ++areas_ok;
    } else if (first_miss.empty()) {
      first_miss = start + " ended at " + end;
    }
  }
  const bool ok = corpus_ok == static_cast<int>(corpus.size()) && corpus.size() == 36 && areas_ok == 9 &&
                  areas.size() == 9;
  std::ostringstream d;
  d << "corpus " << corpus_ok << "/" << corpus.size() << ", telekinesis " << areas_ok << "/9 areas moved the mug to "
    << "the expected tile";
  if (!first_miss.empty()) d << " (" << first_miss << ")";
  report(7, "gesture golden set", ok, d.str());
}

void determinism(const std::map<std::string, SteppedRun>& first) {
  std::size_t same_runs = 0;
  std::size_t same_golden = 0;
  std::string mismatch;
  for (const auto& name : scenario::kScenarioNames) {
    const auto second = scenario::run_scenario(scenario::load_script(scenario_path(name)));
    const auto& d1 = first.at(name).result.metrics.digest;
    const auto golden = read_json(std::string(PHYSHARE_SCENARIO_DIR) + "/golden/" + name + ".json").at("digest");
    same_runs += d1 == second.metrics.digest;
    same_golden += d1 == golden.get<std::string>();
    if (mismatch.empty() && (d1 != second.metrics.digest || d1 != golden)) mismatch = name;
  }
  const std::size_t n = scenario::kScenarioNames.size();
  std::ostringstream d;
  d << same_runs << "/" << n << " digests identical across two runs, " << same_golden << "/" << n
    << " equal the checked-in golden";
  if (!mismatch.empty()) d << " (first mismatch: " << mismatch << ")";
  report(8, "determinism", same_runs == n && same_golden == n, d.str());
}

template <typename F>
void guarded(int n, const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(n, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  std::map<std::string, scenario::ScenarioScript> scripts;
  std::map<std::string, SteppedRun> runs;
  try {
    for (const auto& name : scenario::kScenarioNames) scripts[name] = scenario::load_script(scenario_path(name));
    for (const auto& name : scenario::kScenarioNames) {
      const auto& s = scripts[name];
      std::set<Millis> snaps = {s.duration};
      for (const auto& e : s.events) {
        if (e.type == scenario::EventType::grasp || e.type == scenario::EventType::gesture_injection) snaps.insert(e.t);
      }
      runs[name] = stepped(s, snaps);
    }
  } catch (const std::exception& e) {
    std::printf("FAIL setup: %s\n", e.what());
    return 1;
  }

  guarded(1, "latency budget (tictactoe, L=1500)", [&] { latency_budget(runs.at("tictactoe")); });
  guarded(2, "latency sweep", [&] { latency_sweep(scripts.at("tictactoe"), runs.at("tictactoe")); });
  guarded(3, "nearest-proxy dispatch", [&] { dispatch_oracle(); });
  guarded(4, "relay contract", [&] { relay_contract(); });
  guarded(5, "many-to-one convergence (clink-mugs)", [&] { many_to_one(scripts.at("clink-mugs"), runs.at("clink-mugs")); });
  guarded(6, "motion safety", [&] { motion_safety(runs); });
  guarded(7, "gesture golden set", [&] { gestures(scripts.at("telekinesis"), runs.at("telekinesis")); });
  guarded(8, "determinism", [&] { determinism(runs); });
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
