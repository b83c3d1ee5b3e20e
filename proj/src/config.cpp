#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "evla/errors.hpp"
#include "evla/params.hpp"

namespace evla {

namespace {

struct Entry {
    std::string value;
    int line;
};

using Section = std::map<std::string, Entry>;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const Entry& e, const std::string& key) {
    double out = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line);
    return out;
}

int to_int(const Entry& e, const std::string& key) {
    int out = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("'" + key + "' expects an integer, got '" + e.value + "'", e.line);
    return out;
}

// Consumes known keys from a section; whatever is left is reported as unknown.
class SectionReader {
public:
    SectionReader(std::string name, Section s) : name_(std::move(name)), s_(std::move(s)) {}

    bool has(const std::string& key) const { return s_.count(key) > 0; }

    void number(const std::string& key, double& target, double scale = 1.0) {
        auto it = s_.find(key);
        if (it == s_.end()) return;
        target = to_double(it->second, key) * scale;
        s_.erase(it);
    }

    void integer(const std::string& key, int& target) {
        auto it = s_.find(key);
        if (it == s_.end()) return;
        target = to_int(it->second, key);
        s_.erase(it);
    }

    std::optional<Entry> text(const std::string& key) {
        auto it = s_.find(key);
        if (it == s_.end()) return std::nullopt;
        Entry e = it->second;
        s_.erase(it);
        return e;
    }

    void finish() const {
        if (s_.empty()) return;
        const auto& [key, e] = *s_.begin();
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]", e.line);
    }

private:
    std::string name_;
    Section s_;
};

std::map<std::string, Section> tokenize(std::string_view text, std::map<std::string, int>& header_lines) {
    std::map<std::string, Section> sections;
    std::string current;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (current.empty()) throw ConfigError("empty section name", line_no);
            if (header_lines.count(current))
                throw ConfigError("duplicate section [" + current + "]", line_no);
            header_lines[current] = line_no;
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        if (current.empty()) throw ConfigError("key outside of any section", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);
        auto& sec = sections[current];
        if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        sec[key] = {value, line_no};
    }
    return sections;
}

}  // namespace

ParameterSet parse_config(std::string_view text) {
    std::map<std::string, int> header_lines;
    auto sections = tokenize(text, header_lines);
    auto take = [&](const std::string& name) {
        auto it = sections.find(name);
        Section s;
        if (it != sections.end()) {
            s = std::move(it->second);
            sections.erase(it);
        }
        return SectionReader(name, std::move(s));
    };

    ParameterSet p;

    SectionReader protocol = take("protocol");
    protocol.number("P_laser", p.protocol.P_laser);
    protocol.integer("wavelength", p.protocol.wavelength);
    protocol.number("v", p.protocol.v);
    protocol.number("t_end", p.protocol.t_end);
    protocol.number("u", p.protocol.u);
    protocol.number("T_b", p.protocol.T_b);
    protocol.number("T_air", p.protocol.T_air);
    protocol.number("h_air", p.protocol.h_air);
    if (auto c = protocol.text("case")) {
        if (c->value == "1")
            p.protocol.u = 0;
        else if (c->value == "2")
            p.protocol.u = kCase2BloodVelocity;
        else
            throw ConfigError("'case' must be 1 or 2", c->line);
    }
    protocol.finish();

    SectionReader geometry = take("geometry");
    double r_i = p.geo.r_i;
    geometry.number("r_i", r_i);
    p.geo = default_geometry(r_i);
    geometry.number("r_f", p.geo.r_f);
    if (geometry.has("eps")) {
        geometry.number("eps", p.geo.eps);
        p.geo.r_p = p.geo.r_w() + 10.0;
        p.geo.r_s = p.geo.r_p + 3.0;
    }
    if (geometry.has("r_p")) {
        geometry.number("r_p", p.geo.r_p);
        p.geo.r_s = p.geo.r_p + 3.0;
    }
    geometry.number("r_s", p.geo.r_s);
    geometry.number("L", p.geo.L);
    geometry.finish();

    SectionReader model = take("model");
    if (auto c = model.text("closure")) {
        if (c->value == "zero_value")
            p.model.closure = OuterClosure::ZeroValue;
        else if (c->value == "zero_flux")
            p.model.closure = OuterClosure::ZeroFlux;
        else
            throw ConfigError("'closure' must be zero_value or zero_flux", c->line);
    }
    if (auto n = model.text("normalization")) {
        if (n->value != "tip_irradiance")
            throw ConfigError("'normalization' supports only tip_irradiance", n->line);
    }
    if (auto r = model.text("particular_reading")) {
        if (r->value == "printed_linear")
            p.model.reading = ParticularReading::PrintedLinearRate;
        else if (r->value == "printed_sqrt")
            p.model.reading = ParticularReading::PrintedSqrtRate;
        else if (r->value == "duhamel")
            p.model.reading = ParticularReading::Duhamel;
        else
            throw ConfigError("'particular_reading' must be printed_linear, printed_sqrt or duhamel",
                              r->line);
    }
    model.integer("modes", p.model.modes);
    if (auto c = model.text("case2_modal")) p.model.case2_modal = c->value == "true" || c->value == "1";
    model.finish();

    const int wl = p.protocol.wavelength;
    for (Material m : kMaterials) {
        const std::string mname = name(m);
        SectionReader opt = take("optical." + mname);
        RegionOptics o;
        if (auto reg = registry_optics(m, wl)) {
            o = *reg;
        } else {
            if (!opt.has("mu_a") || !opt.has("mu_s_reduced")) throw UnknownWavelength(wl);
            o.g = m == Material::Blood ? kDefaultBloodAnisotropy : kDefaultTissueAnisotropy;
        }
        opt.number("mu_a", o.mu_a);
        opt.number("mu_s_reduced", o.mu_s_reduced);
        opt.number("g", o.g);
        opt.number("n", o.n);
        opt.finish();
        p.optics[index(m)] = o;

        SectionReader th = take("thermal." + mname);
        RegionThermal t = registry_thermal(m);
        th.number("k", t.k, 1e-3);
        th.number("rho", t.rho, 1e-9);
        th.number("c_p", t.c_p);
        th.number("omega", t.omega, 1e-9);
        th.number("A", t.A);
        th.number("E_a", t.E_a);
        th.finish();
        p.thermal[index(m)] = t;
    }

    if (!sections.empty()) {
        const std::string& unknown = sections.begin()->first;
        throw ConfigError("unknown section [" + unknown + "]", header_lines[unknown]);
    }
    validate(p);
    return p;
}

ParameterSet load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const UnknownWavelength&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::optional<std::string> config_path_from_env() {
    const char* v = std::getenv("EVLA_CONFIG");
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

}  // namespace evla
