#include "evla/params.hpp"

#include <cmath>
#include <sstream>

#include "evla/errors.hpp"

namespace evla {

namespace {

struct OpticalRow {
    int wavelength;
    std::array<double, 4> mu_a;
    std::array<double, 4> mu_s_reduced;
};

// Per wavelength, columns blood, wall, pad, skin; 1/mm.
constexpr std::array<OpticalRow, 3> kOpticalTable = {{
    {810, {0.21, 0.2, 0.017, 0.2}, {0.73, 2.4, 1.2, 0.9}},
    {980, {0.21, 0.1, 0.03, 0.10}, {0.6, 2.0, 1.0, 0.81}},
    {1064, {0.12, 0.12, 0.034, 0.10}, {0.58, 1.95, 0.98, 0.77}},
}};

// Table units: k W/(m degC), rho kg/m^3, c_p J/(kg degC), omega kg/(m^3 s).
struct ThermalRow {
    double k, rho, c_p, omega, A, E_a;
};

constexpr std::array<ThermalRow, 4> kThermalTable = {{
    {0.52, 1060, 3600, 0.0, 7.6e66, 4.48e5},
    {0.53, 1080, 3690, 1.08, 5.6e63, 4.30e5},
    {0.21, 1000, 2350, 1.0, 5.6e63, 4.30e5},
    {0.21, 1109, 3500, 0.5545, 3.1e98, 6.28e5},
}};

constexpr double kPerMetreToPerMm = 1e-3;
constexpr double kPerCubicMetreToPerCubicMm = 1e-9;

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

Material material_of(RegionId region) {
    switch (region) {
        case RegionId::FiberColumn:
        case RegionId::BloodAnnulus: return Material::Blood;
        case RegionId::Wall: return Material::Wall;
        case RegionId::Pad: return Material::Pad;
        case RegionId::Skin: return Material::Skin;
    }
    return Material::Blood;
}

const char* name(RegionId region) {
    switch (region) {
        case RegionId::FiberColumn: return "fiber_column";
        case RegionId::BloodAnnulus: return "blood_annulus";
        case RegionId::Wall: return "wall";
        case RegionId::Pad: return "pad";
        case RegionId::Skin: return "skin";
    }
    return "?";
}

const char* name(Material material) {
    switch (material) {
        case Material::Blood: return "blood";
        case Material::Wall: return "wall";
        case Material::Pad: return "pad";
        case Material::Skin: return "skin";
    }
    return "?";
}

const char* name(OuterClosure c) {
    return c == OuterClosure::ZeroValue ? "zero_value" : "zero_flux";
}

const char* name(ParticularReading r) {
    switch (r) {
        case ParticularReading::PrintedLinearRate: return "printed_linear";
        case ParticularReading::PrintedSqrtRate: return "printed_sqrt";
        case ParticularReading::Duhamel: return "duhamel";
    }
    return "?";
}

std::optional<Material> material_from_name(std::string_view s) {
    for (Material m : kMaterials)
        if (s == name(m)) return m;
    return std::nullopt;
}

DerivedOptics derive_optics(const RegionOptics& o) {
    require(o.mu_a > 0, "mu_a must be > 0");
    require(o.mu_s_reduced > 0, "mu_s_reduced must be > 0");
    require(o.g >= 0 && o.g < 1, "g must lie in [0, 1)");
    require(o.n >= 1, "n must be >= 1");
    DerivedOptics d;
    d.mu_s = o.mu_s_reduced / (1 - o.g);
    d.mu_t = o.mu_a + d.mu_s;
    d.D = 1 / (3 * (o.mu_a + o.mu_s_reduced));
    d.mu_eff = std::sqrt(3 * o.mu_a * (o.mu_a + o.mu_s_reduced));
    d.nu = constants::c_light / o.n;
    return d;
}

Geometry default_geometry(double r_i) {
    Geometry g;
    g.r_i = r_i;
    g.eps = r_i / 5;
    g.r_p = r_i + g.eps + 10.0;
    g.r_s = g.r_p + 3.0;
    return g;
}

void validate(const ParameterSet& p) {
    const Geometry& g = p.geo;
    require(g.r_f > 0, "geometry: r_f must be > 0");
    require(g.r_f < g.r_i, "geometry: r_f < r_i violated");
    require(g.eps > 0, "geometry: eps must be > 0");
    require(g.r_w() < g.r_p, "geometry: r_i + eps < r_p violated");
    require(g.r_p < g.r_s, "geometry: r_p < r_s violated");
    require(g.L > 0, "geometry: L must be > 0");

    const Protocol& pr = p.protocol;
    require(pr.P_laser > 0, "protocol: P_laser must be > 0");
    require(pr.v >= 0, "protocol: v must be >= 0");
    require(pr.t_end > 0, "protocol: t_end must be > 0");
    require(pr.u >= 0, "protocol: u must be >= 0");
    require(pr.T_air < pr.T_b, "protocol: T_air < T_b violated");
    require(pr.h_air > 0, "protocol: h_air must be > 0");

    for (Material m : kMaterials) {
        const std::string tag = std::string(name(m)) + ": ";
        try {
            derive_optics(p.optics_of(m));
        } catch (const ValidationError& e) {
            throw ValidationError("optical." + tag + e.what());
        }
        const RegionThermal& t = p.thermal_of(m);
        require(t.k > 0, "thermal." + tag + "k must be > 0");
        require(t.rho > 0, "thermal." + tag + "rho must be > 0");
        require(t.c_p > 0, "thermal." + tag + "c_p must be > 0");
        require(t.omega >= 0, "thermal." + tag + "omega must be >= 0");
        require(t.A > 0, "thermal." + tag + "A must be > 0");
        require(t.E_a > 0, "thermal." + tag + "E_a must be > 0");
    }
    require(p.thermal_of(Material::Blood).omega == 0, "thermal.blood: omega must be 0 in the lumen");
    require(p.model.modes >= 1, "model: modes must be >= 1");
}

RegionId region_of(double r, const Geometry& geo) {
    if (!(r >= 0) || r > geo.r_s) {
        std::ostringstream os;
        os << "radius " << r << " mm outside [0, " << geo.r_s << "]";
        throw DomainError(os.str());
    }
    if (r < geo.r_f) return RegionId::FiberColumn;
    if (r < geo.r_i) return RegionId::BloodAnnulus;
    if (r < geo.r_w()) return RegionId::Wall;
    if (r < geo.r_p) return RegionId::Pad;
    return RegionId::Skin;
}

std::vector<int> registry_wavelengths() {
    std::vector<int> out;
    for (const auto& row : kOpticalTable) out.push_back(row.wavelength);
    return out;
}

std::optional<RegionOptics> registry_optics(Material m, int wavelength_nm) {
    for (const auto& row : kOpticalTable) {
        if (row.wavelength != wavelength_nm) continue;
        RegionOptics o;
        o.mu_a = row.mu_a[index(m)];
        o.mu_s_reduced = row.mu_s_reduced[index(m)];
        o.g = m == Material::Blood ? kDefaultBloodAnisotropy : kDefaultTissueAnisotropy;
        o.n = constants::n_default;
        return o;
    }
    return std::nullopt;
}

RegionThermal registry_thermal(Material m) {
    const ThermalRow& row = kThermalTable[index(m)];
    RegionThermal t;
    t.k = row.k * kPerMetreToPerMm;
    t.rho = row.rho * kPerCubicMetreToPerCubicMm;
    t.c_p = row.c_p;
    t.omega = row.omega * kPerCubicMetreToPerCubicMm;
    t.A = row.A;
    t.E_a = row.E_a;
    return t;
}

std::vector<RegistryRow> registry_rows() {
    std::vector<RegistryRow> rows;
    for (const auto& row : kOpticalTable) {
        const std::string wl = std::to_string(row.wavelength);
        for (Material m : kMaterials) {
            const std::string reg = name(m);
            rows.push_back({reg, wl, "mu_a", row.mu_a[index(m)], "1/mm", "literature"});
            rows.push_back(
                {reg, wl, "mu_s_reduced", row.mu_s_reduced[index(m)], "1/mm", "literature"});
        }
    }
    for (Material m : kMaterials) {
        const double g = m == Material::Blood ? kDefaultBloodAnisotropy : kDefaultTissueAnisotropy;
        rows.push_back({name(m), "", "g", g, "1", "assumed"});
        rows.push_back({name(m), "", "n", constants::n_default, "1", "literature"});
    }
    for (Material m : kMaterials) {
        const ThermalRow& t = kThermalTable[index(m)];
        const std::string reg = name(m);
        rows.push_back({reg, "", "k", t.k, "W/(m degC)", "literature"});
        rows.push_back({reg, "", "rho", t.rho, "kg/m^3", "literature"});
        rows.push_back({reg, "", "c_p", t.c_p, "J/(kg degC)", "literature"});
        rows.push_back({reg, "", "omega", t.omega, "kg/(m^3 s)",
                        m == Material::Blood ? "assumed" : "literature"});
        rows.push_back({reg, "", "A", t.A, "1/s", "literature"});
        rows.push_back({reg, "", "E_a", t.E_a, "J/mol", "literature"});
    }
    const Protocol pr;
    const Geometry geo = default_geometry();
    rows.push_back({"global", "", "R_gas", constants::R_gas, "J/(mol K)", "literature"});
    rows.push_back({"global", "", "c_light", constants::c_light_mm_per_ps, "mm/ps", "literature"});
    rows.push_back({"global", "", "T_b", pr.T_b, "degC", "literature"});
    rows.push_back({"global", "", "T_air", pr.T_air, "degC", "assumed"});
    rows.push_back({"global", "", "h_air", pr.h_air, "W/(mm^2 degC)", "assumed"});
    rows.push_back({"global", "", "r_f", geo.r_f, "mm", "literature"});
    rows.push_back({"global", "", "r_i", geo.r_i, "mm", "literature"});
    rows.push_back({"global", "", "L", geo.L, "mm", "literature"});
    rows.push_back({"global", "", "v", pr.v, "mm/s", "literature"});
    rows.push_back({"global", "", "u_case2", kCase2BloodVelocity, "mm/s", "literature"});
    return rows;
}

ParameterSet default_parameters(int wavelength_nm, double P_laser) {
    ParameterSet p;
    p.geo = default_geometry();
    p.protocol.P_laser = P_laser;
    p.protocol.wavelength = wavelength_nm;
    for (Material m : kMaterials) {
        auto o = registry_optics(m, wavelength_nm);
        if (!o) throw UnknownWavelength(wavelength_nm);
        p.optics[index(m)] = *o;
        p.thermal[index(m)] = registry_thermal(m);
    }
    return p;
}

}  // namespace evla
