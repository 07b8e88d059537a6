#pragma once

#include <string>
#include <vector>

#include "lorasim/scenario/config.hpp"

namespace lorasim::scenario {

/// Built-in experiment configurations.
std::vector<std::string> preset_names();
/// Throws std::out_of_range for an unknown name.
ScenarioConfig preset(const std::string& name);

}  // namespace lorasim::scenario
