#pragma once

// Arrhenius damage: Omega(t) = A int_0^t exp(-E_a / (R T_K(tau))) dtau.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "evla/params.hpp"

namespace evla {

struct DamageParams {
    double A = 0;    // 1/s
    double E_a = 0;  // J/mol
};

DamageParams damage_params(const RegionThermal& t);

using TemperaturePath = std::function<double(double)>;  // t [s] -> T [degC]

/// exp(-E_a / (R T_K)); zero for T_K <= 0.
double boltzmann_factor(double T_C, const DamageParams& p);

/// Composite Simpson with M panels (2M + 1 samples).
double arrhenius_integral(const TemperaturePath& T, double t, const DamageParams& p, int M);

struct RiemannBounds {
    double right_sum = 0;  // sum_{m=1..M} f(m t / M)
    double left_sum = 0;   // sum_{m=1..M} f((m-1) t / M)
    double lower = 0;
    double upper = 0;
};

/// Sums of exp(-E_a / R T) at right and left partition points; lower/upper
/// are assigned by comparison.
RiemannBounds riemann_bounds(const TemperaturePath& T, double t, int M, const DamageParams& p);

struct TimeBound {
    double seconds = 0;
    bool overflow = false;  // seconds is +inf
};

/// (1/A) exp(E_a / (R T_K)). Throws DomainError for T_min <= -273.15.
TimeBound t_crit_upper_bound(double T_min, const DamageParams& p);

/// Bisection for Omega(t) = threshold on [1e-12, t_end], relative tolerance 1e-6.
/// Empty when Omega(t_end) < threshold.
std::optional<double> find_t_crit(const TemperaturePath& T, double t_end, const DamageParams& p,
                                  double threshold = 1.0, int M = 200);

struct Table3Row {
    double T_min;
    Material material;
    double published;
};

/// Published bounds, rows T_min = 50..100 degC by 10, columns blood, wall, pad, skin.
std::vector<Table3Row> table3_reference();

using TemperatureField = std::function<double(double r, double z, double t)>;

struct DamagePoint {
    double r = 0, z = 0;
    double omega = 0;
    std::optional<double> t_crit;
};

struct DamageMapOptions {
    double t_end = 10;
    double threshold = 1;
    int M = 200;
};

/// Omega(t_end) and t_crit along each point's history. Material from region_of.
std::vector<DamagePoint> damage_map(const TemperatureField& field, const ParameterSet& p,
                                    const std::vector<std::array<double, 2>>& points,
                                    const DamageMapOptions& opt);

}  // namespace evla
