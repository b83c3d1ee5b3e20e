#pragma once

// Physical parameters of the vein/tissue model: material tables, geometry,
// treatment protocol and the coefficients derived from them.
//
// Internal units: lengths in mm, times in s, temperatures in degC, power in W,
// masses in kg. Kelvin only appears inside Arrhenius exponents.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evla {

namespace constants {
inline constexpr double R_gas = 8.314;             // J/(mol K)
inline constexpr double c_light_mm_per_ps = 0.3;   // mm/ps
inline constexpr double c_light = 0.3e12;          // mm/s
inline constexpr double n_default = 1.4;
inline constexpr double kelvin_offset = 273.15;
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

/// Radial zones of the axisymmetric domain, inner to outer.
enum class RegionId { FiberColumn, BloodAnnulus, Wall, Pad, Skin };

/// The four materials. FiberColumn and BloodAnnulus are both blood.
enum class Material { Blood = 0, Wall = 1, Pad = 2, Skin = 3 };

inline constexpr std::array<Material, 4> kMaterials = {Material::Blood, Material::Wall,
                                                       Material::Pad, Material::Skin};
inline constexpr std::array<RegionId, 5> kRegions = {RegionId::FiberColumn,
                                                     RegionId::BloodAnnulus, RegionId::Wall,
                                                     RegionId::Pad, RegionId::Skin};

Material material_of(RegionId region);
const char* name(RegionId region);
const char* name(Material material);
std::optional<Material> material_from_name(std::string_view s);

inline constexpr int index(Material m) { return static_cast<int>(m); }

struct RegionOptics {
    double mu_a = 0;          // 1/mm
    double mu_s_reduced = 0;  // 1/mm
    double g = 0;             // anisotropy
    double n = constants::n_default;
};

struct DerivedOptics {
    double mu_s = 0;    // 1/mm
    double mu_t = 0;    // 1/mm
    double D = 0;       // mm
    double mu_eff = 0;  // 1/mm
    double nu = 0;      // mm/s
};

/// Pure; throws ValidationError when the optics invariants fail.
DerivedOptics derive_optics(const RegionOptics& o);

struct RegionThermal {
    double k = 0;      // W/(mm degC)
    double rho = 0;    // kg/mm^3
    double c_p = 0;    // J/(kg degC)
    double omega = 0;  // kg/(mm^3 s)
    double A = 0;      // 1/s
    double E_a = 0;    // J/mol

    double heat_capacity() const { return rho * c_p; }  // J/(mm^3 degC)
};

struct Geometry {
    double r_f = 0.3;
    double r_i = 3.75;
    double eps = 0.75;
    double r_p = 14.5;
    double r_s = 17.5;
    double L = 10.0;

    double r_w() const { return r_i + eps; }
    /// Interface radii r_f, r_i, r_i+eps, r_p.
    std::array<double, 4> interfaces() const { return {r_f, r_i, r_w(), r_p}; }
};

/// Default geometry for a lumen radius: eps = r_i/5, 10 mm pad, 3 mm skin.
Geometry default_geometry(double r_i = 3.75);

struct Protocol {
    double P_laser = 15.0;  // W
    int wavelength = 810;   // nm
    double v = 1.0;         // mm/s
    double t_end = 10.0;    // s
    double u = 0.0;         // mm/s
    double T_b = 38.0;      // degC
    double T_air = 20.0;    // degC
    double h_air = 1e-5;    // W/(mm^2 degC)

    int flow_case() const { return u > 0 ? 2 : 1; }
};

inline constexpr double kCase2BloodVelocity = 70.0;  // mm/s
inline constexpr double kDefaultBloodAnisotropy = 0.99;
inline constexpr double kDefaultTissueAnisotropy = 0.9;

/// Optical closure at the skin surface.
enum class OuterClosure { ZeroValue, ZeroFlux };

/// How the outer-region particular temperature terms are read.
///  PrintedLinearRate: printed denominators, rate (k mu_eff_j^2 - c_b omega)/(rho c_p).
///  PrintedSqrtRate:   printed denominators, signed square root of that rate.
///  Duhamel:           rate as above, amplitude mu_a_j / (rho c_p (rate + mu v)).
enum class ParticularReading { PrintedLinearRate, PrintedSqrtRate, Duhamel };

const char* name(OuterClosure c);
const char* name(ParticularReading r);

struct ModelOptions {
    OuterClosure closure = OuterClosure::ZeroValue;
    ParticularReading reading = ParticularReading::PrintedLinearRate;
    int modes = 20;             // radial modes in the temperature correction
    bool case2_modal = false;   // experimental flow-case modal assembly
};

struct ParameterSet {
    Geometry geo;
    Protocol protocol;
    ModelOptions model;
    std::array<RegionOptics, 4> optics{};
    std::array<RegionThermal, 4> thermal{};

    const RegionOptics& optics_of(Material m) const { return optics[index(m)]; }
    const RegionThermal& thermal_of(Material m) const { return thermal[index(m)]; }
    DerivedOptics derived(Material m) const { return derive_optics(optics_of(m)); }
    /// Blood specific heat, the c_b of the perfusion and convection terms.
    double c_b() const { return thermal_of(Material::Blood).c_p; }
    double rho_b() const { return thermal_of(Material::Blood).rho; }
};

/// Throws ValidationError naming the first violated invariant.
void validate(const ParameterSet& p);

RegionId region_of(double r, const Geometry& geo);

// ---- built-in tables ----------------------------------------------------

std::vector<int> registry_wavelengths();
/// Absorption / reduced scattering from the optical table, with default g and n.
std::optional<RegionOptics> registry_optics(Material m, int wavelength_nm);
/// Thermal table entry converted to internal units.
RegionThermal registry_thermal(Material m);

struct RegistryRow {
    std::string region;
    std::string wavelength;  // empty for wavelength-independent entries
    std::string key;
    double value;
    std::string unit;
    std::string provenance;  // "literature" or "assumed"
};

/// Every built-in value in table units, in a stable order.
std::vector<RegistryRow> registry_rows();

/// Complete parameter set from the built-in tables and default geometry.
ParameterSet default_parameters(int wavelength_nm = 810, double P_laser = 15.0);

// ---- configuration files ------------------------------------------------

/// Parses `key = value` text with [section] headers. Thermal keys are read in
/// the table units (per metre); everything else in internal units.
ParameterSet parse_config(std::string_view text);
ParameterSet load_config(const std::string& path);

/// EVLA_CONFIG, when set and non-empty.
std::optional<std::string> config_path_from_env();

}  // namespace evla
