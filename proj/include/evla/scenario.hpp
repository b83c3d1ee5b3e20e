#pragma once

// Named wavelength/power presets.

#include <string>
#include <vector>

#include "evla/params.hpp"

namespace evla {

struct Scenario {
    std::string name;
    int wavelength = 810;  // nm
    double power = 15;     // W
    int flow_case = 1;
};

const std::vector<Scenario>& presets();
/// Comma-separated preset names, for messages.
std::string preset_names();
/// Throws ConfigError listing the known presets.
const Scenario& find_preset(const std::string& name);

ParameterSet scenario_parameters(const Scenario& s);

/// Sets u for flow case 1 (0) or 2 (blood velocity). Throws ConfigError otherwise.
void apply_flow_case(ParameterSet& p, int flow_case);

}  // namespace evla
