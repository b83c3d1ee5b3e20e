#include "evla/scenario.hpp"

#include "evla/errors.hpp"

namespace evla {

const std::vector<Scenario>& presets() {
    static const std::vector<Scenario> list = {
        {"810-15w", 810, 15, 1},
        {"980-15w", 980, 15, 1},
        {"980-10w", 980, 10, 1},
        {"1064-10w", 1064, 10, 1},
    };
    return list;
}

std::string preset_names() {
    std::string out;
    for (const Scenario& s : presets()) {
        if (!out.empty()) out += ", ";
        out += s.name;
    }
    return out;
}

const Scenario& find_preset(const std::string& name) {
    for (const Scenario& s : presets())
        if (s.name == name) return s;
    throw ConfigError("unknown preset '" + name + "' (known: " + preset_names() + ")");
}

void apply_flow_case(ParameterSet& p, int flow_case) {
    if (flow_case == 1)
        p.protocol.u = 0;
    else if (flow_case == 2)
        p.protocol.u = kCase2BloodVelocity;
    else
        throw ConfigError("flow case must be 1 or 2, got " + std::to_string(flow_case));
}

ParameterSet scenario_parameters(const Scenario& s) {
    ParameterSet p = default_parameters(s.wavelength, s.power);
    apply_flow_case(p, s.flow_case);
    validate(p);
    return p;
}

}  // namespace evla
