#include "evla/damage.hpp"

#include <cmath>
#include <limits>

#include "evla/errors.hpp"

namespace evla {

DamageParams damage_params(const RegionThermal& t) { return {t.A, t.E_a}; }

double boltzmann_factor(double T_C, const DamageParams& p) {
    const double T_K = T_C + constants::kelvin_offset;
    if (!(T_K > 0)) return 0;
    return std::exp(-p.E_a / (constants::R_gas * T_K));
}

double arrhenius_integral(const TemperaturePath& T, double t, const DamageParams& p, int M) {
    if (!(t > 0)) return 0;
    if (M < 1) throw DomainError("arrhenius_integral needs M >= 1");
    const double h = t / M;
    double sum = boltzmann_factor(T(0.0), p) + boltzmann_factor(T(t), p);
    for (int m = 1; m < M; ++m) sum += 2 * boltzmann_factor(T(m * h), p);
    for (int m = 0; m < M; ++m) sum += 4 * boltzmann_factor(T((m + 0.5) * h), p);
    return p.A * sum * h / 6;
}

RiemannBounds riemann_bounds(const TemperaturePath& T, double t, int M, const DamageParams& p) {
    if (M < 1) throw DomainError("riemann_bounds needs M >= 1");
    RiemannBounds b;
    for (int m = 1; m <= M; ++m) {
        b.right_sum += boltzmann_factor(T(m * t / M), p);
        b.left_sum += boltzmann_factor(T((m - 1) * t / M), p);
    }
    b.lower = std::min(b.right_sum, b.left_sum);
    b.upper = std::max(b.right_sum, b.left_sum);
    return b;
}

TimeBound t_crit_upper_bound(double T_min, const DamageParams& p) {
    const double T_K = T_min + constants::kelvin_offset;
    if (!(T_K > 0)) throw DomainError("T_min must be above absolute zero");
    const double log_t = p.E_a / (constants::R_gas * T_K) - std::log(p.A);
    if (log_t > std::log(std::numeric_limits<double>::max()))
        return {std::numeric_limits<double>::infinity(), true};
    return {std::exp(log_t), false};
}

std::optional<double> find_t_crit(const TemperaturePath& T, double t_end, const DamageParams& p,
                                  double threshold, int M) {
    auto omega = [&](double t) { return arrhenius_integral(T, t, p, M); };
    if (omega(t_end) < threshold) return std::nullopt;
    double lo = 1e-12, hi = t_end;
    if (omega(lo) >= threshold) return lo;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (omega(mid) >= threshold)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::vector<Table3Row> table3_reference() {
    constexpr std::array<std::array<double, 4>, 6> published = {{
        {3.4e5, 5.8e5, 5.8e5, 1.1e3},
        {2.3e3, 4.7e3, 4.7e3, 9.5e-1},
        {2.1e1, 5.1e1, 5.1e1, 1.3e-3},
        {2.4e-1, 7.2e-1, 7.2e-1, 2.5e-6},
        {3.6e-3, 1.3e-2, 1.3e-2, 6.9e-9},
        {6.8e-5, 2.8e-4, 2.8e-4, 2.6e-11},
    }};
    std::vector<Table3Row> rows;
    for (int i = 0; i < 6; ++i)
        for (Material m : kMaterials) rows.push_back({50.0 + 10 * i, m, published[i][index(m)]});
    return rows;
}

std::vector<DamagePoint> damage_map(const TemperatureField& field, const ParameterSet& p,
                                    const std::vector<std::array<double, 2>>& points,
                                    const DamageMapOptions& opt) {
    std::vector<DamagePoint> out;
    out.reserve(points.size());
    for (const auto& [r, z] : points) {
        const DamageParams dp = damage_params(p.thermal_of(material_of(region_of(r, p.geo))));
        const TemperaturePath path = [&, r = r, z = z](double t) { return field(r, z, t); };
        DamagePoint pt;
        pt.r = r;
        pt.z = z;
        pt.omega = arrhenius_integral(path, opt.t_end, dp, opt.M);
        if (pt.omega >= opt.threshold) pt.t_crit = find_t_crit(path, opt.t_end, dp, opt.threshold, opt.M);
        out.push_back(pt);
    }
    return out;
}

}  // namespace evla
