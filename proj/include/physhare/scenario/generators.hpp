#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "physhare/scenario/script.hpp"

namespace physhare::scenario {

/// Parameters a sweep may vary.
inline const std::vector<std::string> kSweepParameters = {"artificial_latency", "robot_speed", "hand_speed",
                                                          "table_size",         "seed",        "relay_delay",
                                                          "relay_jitter",       "frame_interval"};

Parameters default_parameters(std::string_view scenario);
/// Copy of `p` with one named parameter replaced. Throws ContractViolation
/// for an unknown name or a value of the wrong type.
Parameters with_parameter(Parameters p, std::string_view name, double value);

/// Builds the script for one of kScenarioNames from its parameters.
ScenarioScript build_script(std::string_view scenario, const Parameters& params);

/// Ordered tile pairs (from, to) visiting every one of the 81 pairs exactly
/// once, each move starting where the previous one ended.
std::vector<std::pair<int, int>> tile_tour();

/// Delay between a set-down being displayed and the next grasp, long enough
/// for the slowest follower to finish a corner-to-corner move.
Millis tictactoe_settle(const Parameters& p);

}  // namespace physhare::scenario
