#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "physhare/relay/relay.hpp"
#include "physhare/scenario/script.hpp"
#include "physhare/sim/simulation.hpp"

namespace physhare::scenario {

/// Outcome of one scripted gesture injection.
struct GestureOutcome {
  Millis injected_at = 0;
  GestureExpectation expected;
  std::optional<sim::GestureRecord> observed;
  /// Gestures recognised between this injection and the next.
  std::size_t recognised = 0;
  bool correct = false;
};

struct Percentiles {
  std::size_t count = 0;
  Millis p50 = 0;
  Millis p95 = 0;
  Millis p99 = 0;
  Millis max = 0;
};

/// Nearest-rank percentiles; all zero for an empty sample.
Percentiles percentiles(std::vector<Millis> samples);

struct RunMetrics {
  std::string scenario;
  Parameters parameters;
  std::string digest;
  std::int64_t ticks = 0;
  Millis sim_time = 0;
  std::int64_t setdowns = 0;
  std::int64_t illusion_breaks = 0;
  std::vector<std::optional<Millis>> slack;
  std::optional<Millis> min_slack;
  std::optional<double> mean_slack;
  std::int64_t reassignments = 0;
  std::int64_t handoffs = 0;
  std::int64_t unserviceable = 0;
  std::int64_t replans = 0;
  std::int64_t infeasible_plans = 0;
  std::int64_t blocked_plans = 0;
  std::int64_t late_inputs = 0;
  std::int64_t ignored_releases = 0;
  std::int64_t gestures_expected = 0;
  std::int64_t gestures_correct = 0;
  std::optional<double> gesture_accuracy;
  std::int64_t touches = 0;
  std::int64_t touch_misses = 0;
  double max_touch_error = 0.0;
  std::int64_t conflicts = 0;
  std::int64_t quiescent_checks = 0;
  std::int64_t quiescent_failures = 0;
  double max_quiescent_error = 0.0;
  std::map<std::string, std::int64_t> violations;
  std::int64_t ui_commands = 0;
  std::int64_t rejected_ui_commands = 0;
  Percentiles relay_latency;
};

nlohmann::json to_json(const RunMetrics& m);

struct RunResult {
  RunMetrics metrics;
  sim::SimLog log;
  std::vector<GestureOutcome> gestures;
  WorldState final_state;
};

/// One scenario execution, tick by tick. Sites publish their scripted inputs
/// to an in-process relay running on simulated time; the simulation is a
/// relay client that consumes frames, actions and UI commands and publishes
/// its task, binding and scenario messages back.
class ScenarioRun {
 public:
  static constexpr const char* kSimClient = "sim";

  explicit ScenarioRun(ScenarioScript script);
  ~ScenarioRun();
  ScenarioRun(const ScenarioRun&) = delete;
  ScenarioRun& operator=(const ScenarioRun&) = delete;

  bool done() const;
  /// Advances one tick.
  void step();
  /// Runs the remaining ticks and closes the run.
  RunResult finish();

  Millis now() const;
  const ScenarioScript& script() const;
  const sim::Simulation& simulation() const;
  /// Namespace every message of this run travels in.
  const std::string& ns() const;
  relay::Relay& relay();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run_scenario(const ScenarioScript& script);

struct SweepRow {
  double value = 0.0;
  RunMetrics metrics;
};

/// Regenerates `script` with `parameter` set to each value and runs it.
/// An empty value list gives an empty table.
std::vector<SweepRow> sweep(const ScenarioScript& script, std::string_view parameter, const std::vector<double>& values);

std::string sweep_csv(std::string_view parameter, const std::vector<SweepRow>& rows);
/// Flattens scalar metric fields into a header line and one value line.
std::string metrics_csv(const nlohmann::json& metrics);
/// One line per set-down record.
std::string setdowns_csv(const sim::SimLog& log);

}  // namespace physhare::scenario
