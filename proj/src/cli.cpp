#include "evla/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "evla/acceptance.hpp"
#include "evla/csv.hpp"
#include "evla/damage.hpp"
#include "evla/errors.hpp"
#include "evla/fdoracle.hpp"
#include "evla/fluence.hpp"
#include "evla/scenario.hpp"
#include "evla/thermal.hpp"

namespace evla {

namespace {

struct GlobalArgs {
    std::string config;
    std::string preset;
    std::string out;
    std::string times;
    std::string grid;
    std::optional<int> flow_case;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad number '" + s + "' in " + what);
}

ParameterSet resolve_parameters(const GlobalArgs& g) {
    if (!g.config.empty() && !g.preset.empty()) throw ConfigError("give either --config or --preset, not both");
    ParameterSet p;
    if (!g.config.empty())
        p = load_config(g.config);
    else if (!g.preset.empty())
        p = scenario_parameters(find_preset(g.preset));
    else if (const auto env = config_path_from_env())
        p = load_config(*env);
    else
        p = scenario_parameters(presets().front());
    if (g.flow_case) apply_flow_case(p, *g.flow_case);
    validate(p);
    return p;
}

std::vector<double> resolve_times(const GlobalArgs& g, const ParameterSet& p) {
    std::vector<double> times;
    if (g.times.empty()) {
        for (int k = 0; k <= 4; ++k) times.push_back(p.protocol.t_end * k / 4);
        return times;
    }
    for (const std::string& s : split(g.times, ',')) {
        const double t = parse_double(s, "--times");
        if (!(t >= 0 && t <= p.protocol.t_end))
            throw ConfigError("time " + s + " outside [0, t_end]");
        times.push_back(t);
    }
    return times;
}

std::optional<std::array<int, 2>> resolve_grid(const GlobalArgs& g) {
    if (g.grid.empty()) return std::nullopt;
    const auto parts = split(g.grid, ',');
    if (parts.size() != 2) throw ConfigError("--grid expects nr,nz");
    std::array<int, 2> n{};
    for (int k = 0; k < 2; ++k) {
        const double v = parse_double(parts[k], "--grid");
        if (v < 2 || v != std::floor(v)) throw ConfigError("--grid counts must be integers >= 2");
        n[k] = static_cast<int>(v);
    }
    return n;
}

struct Sample {
    double r, z;
};

// Either the full nr x nz lattice, or an on-axis profile plus a radial
// profile through the tip at time t.
std::vector<Sample> output_points(const ParameterSet& p, const std::optional<std::array<int, 2>>& grid,
                                  double t) {
    const Geometry& g = p.geo;
    std::vector<Sample> pts;
    if (grid) {
        const auto [nr, nz] = *grid;
        for (int j = 0; j < nz; ++j)
            for (int i = 0; i < nr; ++i)
                pts.push_back({g.r_s * i / (nr - 1), -g.L + 2 * g.L * j / (nz - 1)});
        return pts;
    }
    const int nz = 201, nr = 176;
    for (int j = 0; j < nz; ++j) pts.push_back({0.0, -g.L + 2 * g.L * j / (nz - 1)});
    const double tip = std::clamp(-p.protocol.v * t, -g.L, g.L);
    for (int i = 1; i < nr; ++i) pts.push_back({g.r_s * i / (nr - 1), tip});
    return pts;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file " + path);
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

int cmd_fluence(const GlobalArgs& g, bool coefficients, std::ostream& out) {
    const ParameterSet p = resolve_parameters(g);
    const FluenceSolution sol = assemble_and_solve(p);
    Output o(g.out, out);
    CsvWriter csv(o.stream());
    if (coefficients) {
        csv.header({"family", "region", "name", "value"});
        for (const CoefficientRow& row : sol.coefficients())
            csv.cell(row.family).cell(row.region).cell(row.name).cell(row.value).end_row();
        return kExitOk;
    }
    const auto grid = resolve_grid(g);
    csv.header({"r_mm", "z_mm", "t_s", "region", "phi_W_per_mm2"});
    for (double t : resolve_times(g, p))
        for (const Sample& s : output_points(p, grid, t))
            csv.cell(s.r).cell(s.z).cell(t).cell(name(region_of(s.r, p.geo)))
                .cell(eval_fluence(sol, s.r, s.z, t))
                .end_row();
    return kExitOk;
}

int cmd_temperature(const GlobalArgs& g, bool mode_table, std::ostream& out, std::ostream& err) {
    const ParameterSet p = resolve_parameters(g);
    const TemperatureSolution sol = build_temperature(p);
    for (const std::string& w : sol.warnings) err << "warning: " << w << '\n';
    Output o(g.out, out);
    CsvWriter csv(o.stream());
    if (mode_table) {
        csv.header({"m", "zeta_m", "beta1_w", "beta1_p", "beta1_s", "A1w", "A1p", "A2p", "A1s", "A2s",
                    "weight"});
        // beta1 columns carry the sign of beta1^2: negative means the modified pair.
        auto signed_root = [](double b2) { return std::copysign(std::sqrt(std::fabs(b2)), b2); };
        for (const Mode& m : sol.modes)
            csv.cell(m.m).cell(m.zeta).cell(signed_root(m.beta1_sq[0])).cell(signed_root(m.beta1_sq[1]))
                .cell(signed_root(m.beta1_sq[2])).cell(m.A1w).cell(m.A1p).cell(m.A2p).cell(m.A1s)
                .cell(m.A2s).cell(m.weight)
                .end_row();
        return kExitOk;
    }
    const auto grid = resolve_grid(g);
    csv.header({"r_mm", "z_mm", "t_s", "region", "T_C"});
    for (double t : resolve_times(g, p))
        for (const Sample& s : output_points(p, grid, t))
            csv.cell(s.r).cell(s.z).cell(t).cell(name(region_of(s.r, p.geo)))
                .cell(eval_temperature(sol, s.r, s.z, t))
                .end_row();
    return kExitOk;
}

// Trilinear interpolation in (r, z, t) over recorded snapshots.
class FDHistory {
public:
    explicit FDHistory(std::vector<FDField> h) : h_(std::move(h)) {}

    double operator()(double r, double z, double t) const {
        auto bracket = [](const std::vector<double>& x, double v, double& w) {
            auto it = std::upper_bound(x.begin(), x.end(), v);
            int i = static_cast<int>(it - x.begin()) - 1;
            i = std::clamp(i, 0, static_cast<int>(x.size()) - 2);
            w = std::clamp((v - x[i]) / (x[i + 1] - x[i]), 0.0, 1.0);
            return i;
        };
        const Grid2D& g = h_.front().grid;
        double wr, wz;
        const int i = bracket(g.r, r, wr), j = bracket(g.z, z, wz);
        auto spatial = [&](const FDField& f) {
            return (1 - wz) * ((1 - wr) * f.at(i, j) + wr * f.at(i + 1, j)) +
                   wz * ((1 - wr) * f.at(i, j + 1) + wr * f.at(i + 1, j + 1));
        };
        size_t n = 0;
        while (n + 2 < h_.size() && h_[n + 1].time <= t) ++n;
        const FDField& a = h_[n];
        const FDField& b = h_[std::min(n + 1, h_.size() - 1)];
        const double wt = b.time > a.time ? std::clamp((t - a.time) / (b.time - a.time), 0.0, 1.0) : 0.0;
        return (1 - wt) * spatial(a) + wt * spatial(b);
    }

private:
    std::vector<FDField> h_;
};

int cmd_damage(const GlobalArgs& g, bool map, std::optional<double> tmin, const std::string& field,
               std::ostream& out, std::ostream& err) {
    Output o(g.out, out);
    CsvWriter csv(o.stream());
    if (!map && !tmin) {
        csv.header({"T_min_C", "region", "computed_s", "published_s", "rel_err"});
        for (const Table3Row& row : table3_reference()) {
            const TimeBound b = t_crit_upper_bound(row.T_min, damage_params(registry_thermal(row.material)));
            csv.cell(row.T_min).cell(name(row.material)).cell(b.seconds).cell(row.published)
                .cell(std::fabs(b.seconds - row.published) / row.published)
                .end_row();
        }
        return kExitOk;
    }

    const ParameterSet p = resolve_parameters(g);
    TemperatureField temperature;
    std::optional<TemperatureSolution> analytic;
    std::shared_ptr<FDHistory> history;
    if (field == "fd") {
        const FluenceSolution fl = assemble_and_solve(p);
        const Grid2D grid = make_grid(p.geo, {6, 40, 12, 50, 20}, 201, -p.geo.L, p.geo.L);
        const AbsorbedPower q(fl, grid);
        HeatFDOptions opt;
        opt.t_end = p.protocol.t_end;
        const int snapshots = static_cast<int>(std::lround(p.protocol.t_end / 0.1));
        for (int k = 0; k <= snapshots; ++k) opt.record_times.push_back(p.protocol.t_end * k / snapshots);
        history = std::make_shared<FDHistory>(
            solve_heat_fd(grid, p, [&q](double t, std::vector<double>& v) { q.evaluate(t, v); }, opt));
        temperature = [history](double r, double z, double t) { return (*history)(r, z, t); };
    } else {
        analytic = build_temperature(p);
        for (const std::string& w : analytic->warnings) err << "warning: " << w << '\n';
        const TemperatureSolution* sol = &*analytic;
        temperature = [sol](double r, double z, double t) { return eval_temperature(*sol, r, z, t); };
    }

    const std::array<int, 2> n = resolve_grid(g).value_or(std::array<int, 2>{36, 21});
    std::vector<std::array<double, 2>> points;
    for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i)
            points.push_back({p.geo.r_s * i / (n[0] - 1), -p.geo.L + 2 * p.geo.L * j / (n[1] - 1)});
    DamageMapOptions opt;
    opt.t_end = p.protocol.t_end;
    const std::vector<DamagePoint> result = damage_map(temperature, p, points, opt);

    std::vector<std::string> columns = {"r_mm", "z_mm", "omega", "t_crit_s"};
    if (tmin) {
        columns.push_back("t_reach_s");
        columns.push_back("t_bound_s");
    }
    csv.header(columns);
    for (const DamagePoint& d : result) {
        csv.cell(d.r).cell(d.z).cell(d.omega);
        d.t_crit ? csv.cell(*d.t_crit) : csv.empty();
        if (tmin) {
            // First sampled time at which T reaches the threshold temperature.
            std::optional<double> reach;
            const int steps = 200;
            for (int k = 0; k <= steps && !reach; ++k) {
                const double t = opt.t_end * k / steps;
                if (temperature(d.r, d.z, t) >= *tmin) reach = t;
            }
            reach ? csv.cell(*reach) : csv.empty();
            const Material m = material_of(region_of(d.r, p.geo));
            csv.cell(t_crit_upper_bound(*tmin, damage_params(p.thermal_of(m))).seconds);
        }
        csv.end_row();
    }
    return kExitOk;
}

int cmd_validate(const GlobalArgs& g, const std::string& only, int refine, std::ostream& out) {
    Output o(g.out, out);
    std::vector<std::string> names;
    if (only.empty())
        for (const CriterionInfo& c : criteria()) names.push_back(c.id);
    else
        names = split(only, ',');
    for (const std::string& n : names) find_criterion(n);  // reject typos before running
    AcceptanceOptions opt;
    opt.grid_refine = refine;
    bool all = true;
    for (const std::string& n : names) {
        const CriterionResult r = run_criterion(n, opt);
        all = all && r.passed;
        o.stream() << format_result(r) << '\n';
        for (const std::string& d : r.details) o.stream() << "      " << d << '\n';
        o.stream().flush();
    }
    return all ? kExitOk : kExitValidation;
}

int cmd_registry(const GlobalArgs& g, std::ostream& out) {
    Output o(g.out, out);
    CsvWriter csv(o.stream());
    csv.header({"region", "wavelength", "key", "value", "unit", "provenance"});
    for (const RegistryRow& row : registry_rows())
        csv.cell(row.region).cell(row.wavelength).cell(row.key).cell(row.value).cell(row.unit)
            .cell(row.provenance)
            .end_row();
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analytic fluence, temperature and damage fields for endovenous laser ablation", "evla"};
    app.fallthrough();
    app.require_subcommand(1);

    GlobalArgs g;
    int flow_case = 0;
    app.add_option("--config", g.config, "Configuration file (default: $EVLA_CONFIG)");
    app.add_option("--preset", g.preset, "Built-in scenario: " + preset_names());
    app.add_option("--out", g.out, "Write CSV here instead of stdout");
    app.add_option("--times", g.times, "Comma-separated times in s (default 0,2.5,5,7.5,10)");
    app.add_option("--grid", g.grid, "Output lattice nr,nz instead of axis/tip profiles");
    auto* case_opt = app.add_option("--case", flow_case, "Flow case: 1 (no flow) or 2 (blood flow)");

    auto* fluence = app.add_subcommand("fluence", "Fluence rate field");
    bool coefficients = false;
    fluence->add_flag("--coefficients", coefficients, "Dump the solved coefficients instead");

    auto* temperature = app.add_subcommand("temperature", "Temperature field");
    bool mode_table = false;
    temperature->add_flag("--modes", mode_table, "Dump the radial mode table instead");

    auto* damage = app.add_subcommand("damage", "Arrhenius damage");
    bool table3 = false, map = false;
    double tmin = 0;
    std::string field = "analytic";
    damage->add_flag("--table3", table3, "Critical-time upper bounds with reference values (default)");
    damage->add_flag("--map", map, "Damage map over the output lattice");
    auto* tmin_opt = damage->add_option("--tmin", tmin, "Report threshold temperature in degC");
    damage->add_option("--field", field, "Temperature source for --map")->check(CLI::IsMember({"analytic", "fd"}));

    auto* validate_cmd = app.add_subcommand("validate", "Run the acceptance criteria");
    std::string only;
    int refine = 2;
    validate_cmd->add_option("--only", only, "Comma-separated criterion ids or names");
    validate_cmd->add_option("--grid-refine", refine, "Fine/coarse grid ratio for the oracle comparison")
        ->check(CLI::Range(2, 4));

    auto* registry = app.add_subcommand("registry", "Dump the built-in parameter tables");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (case_opt->count() > 0) g.flow_case = flow_case;

    try {
        if (fluence->parsed()) return cmd_fluence(g, coefficients, out);
        if (temperature->parsed()) return cmd_temperature(g, mode_table, out, err);
        if (damage->parsed()) {
            if (table3 && (map || tmin_opt->count() > 0))
                throw ConfigError("--table3 cannot be combined with --map or --tmin");
            std::optional<double> t;
            if (tmin_opt->count() > 0) t = tmin;
            return cmd_damage(g, map, t, field, out, err);
        }
        if (validate_cmd->parsed()) return cmd_validate(g, only, refine, out);
        if (registry->parsed()) return cmd_registry(g, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitConfig;
}

}  // namespace evla
