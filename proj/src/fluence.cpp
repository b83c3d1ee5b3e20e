#include "evla/fluence.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "evla/errors.hpp"
#include "evla/specfn.hpp"

namespace evla {

namespace {

using specfn::BesselKind;

constexpr double kContinuityTol = 1e-9;
constexpr double kSingularRcond = 1e-15;

// Value and derivative of a cylinder-function pair at r.
struct Pair {
    double first, second;
};

Pair pair_value(WKind kind, double k, double r) {
    const double x = k * r;
    if (kind == WKind::Modified) return {specfn::i0(x), specfn::k0(x)};
    return {specfn::j0(x), specfn::y0(x)};
}

Pair pair_derivative(WKind kind, double k, double r) {
    const double x = k * r;
    if (kind == WKind::Modified) return {k * specfn::i1(x), -k * specfn::k1(x)};
    return {-k * specfn::j1(x), -k * specfn::y1(x)};
}

// Antiderivative of r * pair(k r).
Pair pair_moment(WKind kind, double k, double r) {
    if (r == 0) {
        // r I1 and r J1 vanish at the axis; K/Y never reach it.
        return {0, 0};
    }
    const double x = k * r;
    if (kind == WKind::Modified) return {r * specfn::i1(x) / k, -r * specfn::k1(x) / k};
    return {r * specfn::j1(x) / k, r * specfn::y1(x) / k};
}

int outer_index(Material m) { return index(m) - 1; }

double relative_jump(double a, double b, double scale) {
    const double s = std::max({std::fabs(a), std::fabs(b), scale});
    return s == 0 ? 0 : std::fabs(a - b) / s;
}

}  // namespace

double SourceTerm::eval(double r, double z, double t) const {
    if (r >= r_f) return 0;
    return S0 * std::exp(-mu_t_blood * (z + v * t));
}

SourceTerm build_source(const Protocol& protocol, const Geometry& geo,
                        const RegionOptics& blood_optics) {
    const DerivedOptics d = derive_optics(blood_optics);
    SourceTerm s;
    const double irradiance = protocol.P_laser / (constants::pi * geo.r_f * geo.r_f);
    s.S0 = irradiance * d.mu_s * (d.mu_t + blood_optics.g * blood_optics.mu_a) /
           (blood_optics.mu_a + blood_optics.mu_s_reduced);
    s.mu_t_blood = d.mu_t;
    s.v = protocol.v;
    s.r_f = geo.r_f;
    return s;
}

const char* name(WKind k) { return k == WKind::Modified ? "modified" : "standard"; }

BranchFactors branch_factors(const ParameterSet& p) {
    const DerivedOptics blood = p.derived(Material::Blood);
    BranchFactors b;
    const double mu_eff2 = blood.mu_eff * blood.mu_eff;
    const double mu_t2 = blood.mu_t * blood.mu_t;

    const double rb = mu_t2 - mu_eff2;
    if (!(rb > 0)) throw NonPositiveRadicand("blood", "mu_t", rb);
    b.beta_blood = std::sqrt(rb);

    for (Material m : {Material::Wall, Material::Pad, Material::Skin}) {
        const int j = outer_index(m);
        const DerivedOptics d = p.derived(m);
        const double mj2 = d.mu_eff * d.mu_eff;
        const double rk = mj2 - mu_eff2;
        if (rk == 0) throw NonPositiveRadicand(name(m), "mu_eff", 0.0);
        b.w_kind[j] = rk > 0 ? WKind::Modified : WKind::Standard;
        b.kappa[j] = std::sqrt(std::fabs(rk));
        const double rt = mu_t2 - mj2;
        if (!(rt > 0)) throw NonPositiveRadicand(name(m), "mu_t", rt);
        b.beta[j] = std::sqrt(rt);
    }
    return b;
}

double FluenceSolution::radial(Family f, double r) const {
    const RegionId reg = region_of(r, params.geo);
    if (reg == RegionId::FiberColumn) return f == Family::MuEff ? B0 : -P_in;
    if (reg == RegionId::BloodAnnulus) {
        if (f == Family::MuEff) return B0;
        const Pair v = pair_value(WKind::Standard, branch.beta_blood, r);
        return B1 * v.first + B2 * v.second;
    }
    const int j = outer_index(material_of(reg));
    if (f == Family::MuEff) {
        const Pair v = pair_value(branch.w_kind[j], branch.kappa[j], r);
        return B3[j] * v.first + B4[j] * v.second;
    }
    const Pair v = pair_value(WKind::Standard, branch.beta[j], r);
    return B5[j] * v.first + B6[j] * v.second;
}

double FluenceSolution::radial_derivative(Family f, double r) const {
    const RegionId reg = region_of(r, params.geo);
    if (reg == RegionId::FiberColumn) return 0;
    if (reg == RegionId::BloodAnnulus) {
        if (f == Family::MuEff) return 0;
        const Pair d = pair_derivative(WKind::Standard, branch.beta_blood, r);
        return B1 * d.first + B2 * d.second;
    }
    const int j = outer_index(material_of(reg));
    if (f == Family::MuEff) {
        const Pair d = pair_derivative(branch.w_kind[j], branch.kappa[j], r);
        return B3[j] * d.first + B4[j] * d.second;
    }
    const Pair d = pair_derivative(WKind::Standard, branch.beta[j], r);
    return B5[j] * d.first + B6[j] * d.second;
}

double FluenceSolution::radial_moment(Family f, double a, double b) const {
    if (b < a) return -radial_moment(f, b, a);
    const Geometry& g = params.geo;
    const std::array<double, 6> edges = {0.0, g.r_f, g.r_i, g.r_w(), g.r_p, g.r_s};
    double total = 0;
    for (int seg = 0; seg < 5; ++seg) {
        const double lo = std::max(a, edges[seg]);
        const double hi = std::min(b, edges[seg + 1]);
        if (!(hi > lo)) continue;
        const double area = 0.5 * (hi * hi - lo * lo);
        auto span = [&](WKind kind, double k, double c1, double c2) {
            const Pair P = pair_moment(kind, k, hi);
            const Pair Q = pair_moment(kind, k, lo);
            return c1 * (P.first - Q.first) + c2 * (P.second - Q.second);
        };
        if (seg == 0) {
            total += (f == Family::MuEff ? B0 : -P_in) * area;
        } else if (seg == 1) {
            total += f == Family::MuEff ? B0 * area
                                        : span(WKind::Standard, branch.beta_blood, B1, B2);
        } else {
            const int j = seg - 2;
            total += f == Family::MuEff ? span(branch.w_kind[j], branch.kappa[j], B3[j], B4[j])
                                        : span(WKind::Standard, branch.beta[j], B5[j], B6[j]);
        }
    }
    return total;
}

double FluenceSolution::at(double r, double s) const {
    const double sa = std::fabs(s);
    return radial(Family::MuEff, r) * std::exp(-mu_eff() * sa) +
           radial(Family::MuT, r) * std::exp(-mu_t() * sa);
}

namespace {

// Region on the requested material side of an interface radius.
RegionId side_region(double r, const Geometry& g, Material side) {
    if (side == Material::Blood) return r <= g.r_f ? RegionId::FiberColumn : RegionId::BloodAnnulus;
    switch (side) {
        case Material::Wall: return RegionId::Wall;
        case Material::Pad: return RegionId::Pad;
        default: return RegionId::Skin;
    }
}

}  // namespace

double FluenceSolution::value_on_side(double r, double s, Material side) const {
    // Evaluate the region's closed form at r even if r sits on its boundary.
    const RegionId reg = side_region(r, params.geo, side);
    const double sa = std::fabs(s);
    const double ee = std::exp(-mu_eff() * sa);
    const double et = std::exp(-mu_t() * sa);
    if (reg == RegionId::FiberColumn) return B0 * ee - P_in * et;
    if (reg == RegionId::BloodAnnulus) {
        const Pair v = pair_value(WKind::Standard, branch.beta_blood, r);
        return B0 * ee + (B1 * v.first + B2 * v.second) * et;
    }
    const int j = outer_index(side);
    const Pair w = pair_value(branch.w_kind[j], branch.kappa[j], r);
    const Pair v = pair_value(WKind::Standard, branch.beta[j], r);
    return (B3[j] * w.first + B4[j] * w.second) * ee + (B5[j] * v.first + B6[j] * v.second) * et;
}

double FluenceSolution::flux(double r, double s, Material side) const {
    const RegionId reg = side_region(r, params.geo, side);
    const double sa = std::fabs(s);
    const double et = std::exp(-mu_t() * sa);
    const double D = optics[index(side)].D;
    if (reg == RegionId::FiberColumn) return 0;
    if (reg == RegionId::BloodAnnulus) {
        const Pair d = pair_derivative(WKind::Standard, branch.beta_blood, r);
        return D * (B1 * d.first + B2 * d.second) * et;
    }
    const double ee = std::exp(-mu_eff() * sa);
    const int j = outer_index(side);
    const Pair w = pair_derivative(branch.w_kind[j], branch.kappa[j], r);
    const Pair v = pair_derivative(WKind::Standard, branch.beta[j], r);
    return D * ((B3[j] * w.first + B4[j] * w.second) * ee +
                (B5[j] * v.first + B6[j] * v.second) * et);
}

std::vector<CoefficientRow> FluenceSolution::coefficients() const {
    std::vector<CoefficientRow> rows;
    rows.push_back({"mu_eff", "lumen", "B0", B0});
    rows.push_back({"mu_t", "fiber_column", "P_in", P_in});
    rows.push_back({"mu_t", "blood_annulus", "B1", B1});
    rows.push_back({"mu_t", "blood_annulus", "B2", B2});
    for (Material m : {Material::Wall, Material::Pad, Material::Skin}) {
        const int j = outer_index(m);
        rows.push_back({"mu_eff", name(m), "B3", B3[j]});
        rows.push_back({"mu_eff", name(m), "B4", B4[j]});
    }
    for (Material m : {Material::Wall, Material::Pad, Material::Skin}) {
        const int j = outer_index(m);
        rows.push_back({"mu_t", name(m), "B5", B5[j]});
        rows.push_back({"mu_t", name(m), "B6", B6[j]});
    }
    return rows;
}

FluenceSolution assemble_and_solve(const ParameterSet& p) {
    validate(p);
    FluenceSolution sol;
    sol.params = p;
    for (Material m : kMaterials) sol.optics[index(m)] = p.derived(m);
    sol.src = build_source(p.protocol, p.geo, p.optics_of(Material::Blood));
    sol.branch = branch_factors(p);

    const DerivedOptics& blood = sol.optics[0];
    const RegionOptics& bo = p.optics_of(Material::Blood);
    const double denom = blood.D * blood.mu_t * blood.mu_t - bo.mu_a;
    if (!(denom > 0)) throw NonPositiveRadicand("blood", "D mu_t^2 - mu_a", denom);
    sol.P_in = sol.src.S0 / denom;

    const Geometry& g = p.geo;
    const BranchFactors& br = sol.branch;
    const std::array<double, 3> D = {sol.optics[1].D, sol.optics[2].D, sol.optics[3].D};
    const std::array<double, 2> outer_interfaces = {g.r_w(), g.r_p};

    // mu_eff family: x = (B0, B3w, B4w, B3p, B4p, B3s, B4s).
    {
        Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Zero();
        Eigen::Matrix<double, 7, 1> rhs = Eigen::Matrix<double, 7, 1>::Zero();
        A(0, 0) = 1;
        rhs(0) = p.protocol.P_laser / (constants::pi * g.r_f * g.r_f) + sol.P_in;

        const Pair w = pair_value(br.w_kind[0], br.kappa[0], g.r_i);
        const Pair wd = pair_derivative(br.w_kind[0], br.kappa[0], g.r_i);
        A(1, 0) = 1;
        A(1, 1) = -w.first;
        A(1, 2) = -w.second;
        A(2, 1) = D[0] * wd.first;
        A(2, 2) = D[0] * wd.second;
        for (int i = 0; i < 2; ++i) {
            const double r = outer_interfaces[i];
            const int c = 1 + 2 * i;
            const Pair a = pair_value(br.w_kind[i], br.kappa[i], r);
            const Pair ad = pair_derivative(br.w_kind[i], br.kappa[i], r);
            const Pair b = pair_value(br.w_kind[i + 1], br.kappa[i + 1], r);
            const Pair bd = pair_derivative(br.w_kind[i + 1], br.kappa[i + 1], r);
            const int row = 3 + 2 * i;
            A(row, c) = a.first;
            A(row, c + 1) = a.second;
            A(row, c + 2) = -b.first;
            A(row, c + 3) = -b.second;
            A(row + 1, c) = D[i] * ad.first;
            A(row + 1, c + 1) = D[i] * ad.second;
            A(row + 1, c + 2) = -D[i + 1] * bd.first;
            A(row + 1, c + 3) = -D[i + 1] * bd.second;
        }
        Eigen::PartialPivLU<Eigen::Matrix<double, 7, 7>> lu(A);
        sol.rcond_mu_eff = lu.rcond();
        if (!(sol.rcond_mu_eff > kSingularRcond))
            throw SingularSystem("mu_eff", 1 / sol.rcond_mu_eff);
        const Eigen::Matrix<double, 7, 1> x = lu.solve(rhs);
        sol.B0 = x(0);
        for (int j = 0; j < 3; ++j) {
            sol.B3[j] = x(1 + 2 * j);
            sol.B4[j] = x(2 + 2 * j);
        }
    }

    // mu_t family: x = (B1, B2, B5w, B6w, B5p, B6p, B5s, B6s).
    {
        Eigen::Matrix<double, 8, 8> A = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 1> rhs = Eigen::Matrix<double, 8, 1>::Zero();
        const std::array<double, 4> beta = {br.beta_blood, br.beta[0], br.beta[1], br.beta[2]};
        const std::array<double, 4> Dall = {blood.D, D[0], D[1], D[2]};
        const std::array<double, 3> radii = {g.r_i, g.r_w(), g.r_p};

        const Pair f = pair_value(WKind::Standard, beta[0], g.r_f);
        A(0, 0) = f.first;
        A(0, 1) = f.second;
        rhs(0) = -sol.P_in;
        for (int i = 0; i < 3; ++i) {
            const double r = radii[i];
            const int c = 2 * i;
            const Pair a = pair_value(WKind::Standard, beta[i], r);
            const Pair ad = pair_derivative(WKind::Standard, beta[i], r);
            const Pair b = pair_value(WKind::Standard, beta[i + 1], r);
            const Pair bd = pair_derivative(WKind::Standard, beta[i + 1], r);
            const int row = 1 + 2 * i;
            A(row, c) = a.first;
            A(row, c + 1) = a.second;
            A(row, c + 2) = -b.first;
            A(row, c + 3) = -b.second;
            A(row + 1, c) = Dall[i] * ad.first;
            A(row + 1, c + 1) = Dall[i] * ad.second;
            A(row + 1, c + 2) = -Dall[i + 1] * bd.first;
            A(row + 1, c + 3) = -Dall[i + 1] * bd.second;
        }
        const Pair closure = p.model.closure == OuterClosure::ZeroValue
                                 ? pair_value(WKind::Standard, beta[3], g.r_s)
                                 : pair_derivative(WKind::Standard, beta[3], g.r_s);
        A(7, 6) = closure.first;
        A(7, 7) = closure.second;

        Eigen::PartialPivLU<Eigen::Matrix<double, 8, 8>> lu(A);
        sol.rcond_mu_t = lu.rcond();
        if (!(sol.rcond_mu_t > kSingularRcond)) throw SingularSystem("mu_t", 1 / sol.rcond_mu_t);
        const Eigen::Matrix<double, 8, 1> x = lu.solve(rhs);
        sol.B1 = x(0);
        sol.B2 = x(1);
        for (int j = 0; j < 3; ++j) {
            sol.B5[j] = x(2 + 2 * j);
            sol.B6[j] = x(3 + 2 * j);
        }
    }

    const ContinuityReport rep = continuity_residuals(sol, 5, 0);
    if (rep.value_jump > kContinuityTol || rep.flux_jump > kContinuityTol) {
        std::ostringstream os;
        os << "continuity (value " << rep.value_jump << ", flux " << rep.flux_jump << ")";
        throw SingularSystem(os.str(), 1 / std::min(sol.rcond_mu_eff, sol.rcond_mu_t));
    }
    return sol;
}

double eval_fluence(const FluenceSolution& sol, double r, double z, double t) {
    const Geometry& g = sol.params.geo;
    const double t_end = sol.params.protocol.t_end;
    if (!(r >= 0 && r <= g.r_s) || !(z >= -g.L && z <= g.L) || !(t >= 0 && t <= t_end)) {
        std::ostringstream os;
        os << "fluence evaluated outside the domain at (r, z, t) = (" << r << ", " << z << ", "
           << t << ")";
        throw DomainError(os.str());
    }
    return sol.at(r, z + sol.v() * t);
}

double transient_rate(const DerivedOptics& blood, const RegionOptics& blood_optics) {
    return blood.nu * (blood.D * blood.mu_t * blood.mu_t - blood_optics.mu_a);
}

double eval_fluence_transient(const Protocol& protocol, const Geometry& geo,
                              const RegionOptics& blood_optics, double r, double z, double t) {
    if (!(r >= 0 && r < geo.r_f)) throw DomainError("transient fluence is defined for r < r_f only");
    if (!(t >= 0)) throw DomainError("transient fluence needs t >= 0");
    const DerivedOptics d = derive_optics(blood_optics);
    const SourceTerm src = build_source(protocol, geo, blood_optics);
    const double zeta = transient_rate(d, blood_optics);
    const double decay = zeta + d.mu_t * protocol.v;
    const double amplitude = d.nu * src.eval(0, z, 0) / decay;
    // exp(zeta t) (1 - exp(-decay t)) without cancellation at small t.
    return amplitude * std::exp(zeta * t) * -std::expm1(-decay * t);
}

namespace {

// Sum of absolute term contributions to D dphi/dr on one side of r.
double flux_magnitude(const FluenceSolution& sol, double r, double sa, Material side) {
    const RegionId reg = side_region(r, sol.params.geo, side);
    if (reg == RegionId::FiberColumn) return 0;
    const double D = sol.optics[index(side)].D;
    const double ee = std::exp(-sol.mu_eff() * sa);
    const double et = std::exp(-sol.mu_t() * sa);
    if (reg == RegionId::BloodAnnulus) {
        const Pair d = pair_derivative(WKind::Standard, sol.branch.beta_blood, r);
        return D * (std::fabs(sol.B1 * d.first) + std::fabs(sol.B2 * d.second)) * et;
    }
    const int j = outer_index(side);
    const Pair w = pair_derivative(sol.branch.w_kind[j], sol.branch.kappa[j], r);
    const Pair v = pair_derivative(WKind::Standard, sol.branch.beta[j], r);
    return D * ((std::fabs(sol.B3[j] * w.first) + std::fabs(sol.B4[j] * w.second)) * ee +
                (std::fabs(sol.B5[j] * v.first) + std::fabs(sol.B6[j] * v.second)) * et);
}

}  // namespace

ContinuityReport continuity_residuals(const FluenceSolution& sol, int nz, double t) {
    ContinuityReport rep;
    const Geometry& g = sol.params.geo;
    const std::array<double, 3> radii = {g.r_i, g.r_w(), g.r_p};
    const std::array<Material, 3> inner = {Material::Blood, Material::Wall, Material::Pad};
    const std::array<Material, 3> outer = {Material::Wall, Material::Pad, Material::Skin};
    for (int k = 0; k < nz; ++k) {
        const double z = nz == 1 ? 0.0 : -g.L + 2 * g.L * k / (nz - 1);
        const double sa = std::fabs(z + sol.v() * t);
        const double ee = std::exp(-sol.mu_eff() * sa);
        const double et = std::exp(-sol.mu_t() * sa);

        // r_f: column value against the annulus closed form.
        const Pair f = pair_value(WKind::Standard, sol.branch.beta_blood, g.r_f);
        const double annulus_t = sol.B1 * f.first + sol.B2 * f.second;
        rep.value_jump = std::max(
            rep.value_jump, relative_jump(-sol.P_in * et, annulus_t * et,
                                          std::fabs(sol.B0 * ee) + std::fabs(sol.P_in * et)));

        for (int i = 0; i < 3; ++i) {
            const double r = radii[i];
            const double scale = std::fabs(sol.radial(Family::MuEff, r) * ee) +
                                 std::fabs(sol.radial(Family::MuT, r) * et);
            rep.value_jump = std::max(
                rep.value_jump, relative_jump(sol.value_on_side(r, sa, inner[i]),
                                              sol.value_on_side(r, sa, outer[i]), scale));
            const double fa = sol.flux(r, sa, inner[i]);
            const double fb = sol.flux(r, sa, outer[i]);
            const double fscale = std::max(flux_magnitude(sol, r, sa, inner[i]),
                                           flux_magnitude(sol, r, sa, outer[i]));
            rep.flux_jump = std::max(rep.flux_jump, relative_jump(fa, fb, fscale));
        }
    }
    return rep;
}

}  // namespace evla
