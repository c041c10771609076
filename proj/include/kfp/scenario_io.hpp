#pragma once

#include <string>

#include "kfp/integrator.hpp"

namespace kfp {

/// Parses the plain-text sectioned scenario format. Unknown keys are
/// rejected with their section.key path; constraint violations name the key.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::string& path);

/// Canonical echo with every default materialized; identical scenarios
/// produce identical echoes (the scenario hash is taken over this text).
std::string echo_scenario(const Scenario& s);

std::string scenario_hash(const Scenario& s);

}  // namespace kfp
