#pragma once

#include <string>

#include "wsc/scenario.hpp"

namespace wsc {

// Scenario files mirror ScenarioSpec field for field. Per-covariate
// coefficient vectors (preference.a, exposure_logit.g, outcome_model.b,
// outcome_model.tau.t) are objects keyed by covariate name, with absent
// names meaning 0; a plain array of length k is accepted as well.
// Errors are InvalidSpec with the offending field path in the message.
ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::string& path);

std::string scenario_to_json(const ScenarioSpec& spec);

}  // namespace wsc
