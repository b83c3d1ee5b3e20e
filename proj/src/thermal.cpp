#include "evla/thermal.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "evla/errors.hpp"
#include "evla/specfn.hpp"

namespace evla {

namespace {

constexpr double kPi = constants::pi;

// phi1(x) = (1 - e^-x)/x, with phi1(0) = 1.
double phi1(double x) {
    if (std::fabs(x) < 1e-8) return 1 - x / 2;
    return -std::expm1(-x) / x;
}

// e^shift (e^{rate t} - e^{-d t}) / (rate + d), factoring out the larger exponential.
double shifted_duhamel(double rate, double d, double t, double shift) {
    const double x = (rate + d) * t;
    if (x >= 0) return std::exp(rate * t + shift) * t * phi1(x);
    return std::exp(-d * t + shift) * t * phi1(-x);
}

struct Pair {
    double first, second;
};

// Radial pair for (r R')' = -beta^2 r R (Standard) or +beta^2 r R (Modified);
// b = sqrt(|beta^2|).
Pair radial_pair(RadialKind kind, double b, double r) {
    const double x = b * r;
    if (kind == RadialKind::Modified) return {specfn::i0(x), specfn::k0(x)};
    return {specfn::j0(x), specfn::y0(x)};
}

Pair radial_pair_derivative(RadialKind kind, double b, double r) {
    const double x = b * r;
    if (kind == RadialKind::Modified) return {b * specfn::i1(x), -b * specfn::k1(x)};
    return {-b * specfn::j1(x), -b * specfn::y1(x)};
}

// Solves [p1 p2; d1 d2] x = [value; slope].
Pair match(const Pair& p, const Pair& d, double value, double slope) {
    const double det = p.first * d.second - p.second * d.first;
    return {(value * d.second - p.second * slope) / det, (p.first * slope - value * d.first) / det};
}

struct RegionShape {
    RadialKind kind = RadialKind::Standard;
    double b = 0;
};

RegionShape region_shape(double beta_sq) {
    // Keep clear of beta = 0 where the second-kind functions lose their scale.
    constexpr double kFloor = 1e-14;
    if (std::fabs(beta_sq) < kFloor) beta_sq = beta_sq < 0 ? -kFloor : kFloor;
    return {beta_sq < 0 ? RadialKind::Modified : RadialKind::Standard, std::sqrt(std::fabs(beta_sq))};
}

double beta_sq_of(const RegionThermal& t, double c_b, double eta, double zeta) {
    return (-t.rho * t.c_p * zeta - c_b * t.omega) / t.k - eta * eta;
}

// Unit-slope wall solution vanishing at r_i: coefficient multiplying the
// Dirichlet combination.
double wall_scale(RadialKind kind, double r_i) {
    return kind == RadialKind::Modified ? r_i : -kPi * r_i / 2;
}

double wall_value(RadialKind kind, double b, double r_i, double r) {
    const Pair at_i = radial_pair(kind, b, r_i);
    const Pair at_r = radial_pair(kind, b, r);
    return at_i.second * at_r.first - at_i.first * at_r.second;
}

double wall_derivative(RadialKind kind, double b, double r_i, double r) {
    const Pair at_i = radial_pair(kind, b, r_i);
    const Pair d = radial_pair_derivative(kind, b, r);
    return at_i.second * d.first - at_i.first * d.second;
}

struct ModeBuild {
    Mode mode;
    double robin = 0;
};

ModeBuild build_mode(const ModalContext& ctx, double eta, double zeta) {
    const Geometry& g = ctx.geo;
    Mode md;
    md.eta = eta;
    md.zeta = zeta;
    std::array<RegionShape, 3> sh;
    for (int j = 0; j < 3; ++j) {
        md.beta1_sq[j] = beta_sq_of(ctx.tissue[j], ctx.c_b, eta, zeta);
        sh[j] = region_shape(md.beta1_sq[j]);
        md.kind[j] = sh[j].kind;
    }
    md.A1w = wall_scale(sh[0].kind, g.r_i);
    const double r_w = g.r_w();
    const double vw = md.A1w * wall_value(sh[0].kind, sh[0].b, g.r_i, r_w);
    const double dw = md.A1w * wall_derivative(sh[0].kind, sh[0].b, g.r_i, r_w);
    const Pair cp = match(radial_pair(sh[1].kind, sh[1].b, r_w),
                          radial_pair_derivative(sh[1].kind, sh[1].b, r_w), vw,
                          ctx.tissue[0].k * dw / ctx.tissue[1].k);
    md.A1p = cp.first;
    md.A2p = cp.second;
    const Pair pv = radial_pair(sh[1].kind, sh[1].b, g.r_p);
    const Pair pd = radial_pair_derivative(sh[1].kind, sh[1].b, g.r_p);
    const double vp = md.A1p * pv.first + md.A2p * pv.second;
    const double dp = md.A1p * pd.first + md.A2p * pd.second;
    const Pair cs = match(radial_pair(sh[2].kind, sh[2].b, g.r_p),
                          radial_pair_derivative(sh[2].kind, sh[2].b, g.r_p), vp,
                          ctx.tissue[1].k * dp / ctx.tissue[2].k);
    md.A1s = cs.first;
    md.A2s = cs.second;
    const Pair sv = radial_pair(sh[2].kind, sh[2].b, g.r_s);
    const Pair sd = radial_pair_derivative(sh[2].kind, sh[2].b, g.r_s);
    const double rs_value = md.A1s * sv.first + md.A2s * sv.second;
    const double rs_slope = md.A1s * sd.first + md.A2s * sd.second;
    return {md, ctx.tissue[2].k * rs_slope + ctx.h_air * rs_value};
}

}  // namespace

GenericPDEParams pde_params(const ParameterSet& p, Material m) {
    const RegionThermal& t = p.thermal_of(m);
    GenericPDEParams g;
    g.alpha = t.heat_capacity();
    g.a = t.k;
    if (m == Material::Blood)
        g.b = p.rho_b() * p.c_b() * p.protocol.u;
    else
        g.B = p.c_b() * t.omega;
    return g;
}

double duhamel_kernel(double rate, double d, double t) { return shifted_duhamel(rate, d, t, 0); }

double particular_kernel(double rate, double mu, double v, double z, double t) {
    const double a = rate * t - mu * z;
    const double b = -mu * (z + v * t);
    if (a >= b) return std::exp(a) * -std::expm1(b - a);
    return -std::exp(b) * -std::expm1(a - b);
}

ParticularTerms particular_terms(const FluenceSolution& fl, const ParameterSet& p,
                                 ParticularReading reading) {
    ParticularTerms pt;
    pt.reading = reading;
    pt.v = p.protocol.v;
    const double u = p.protocol.u;
    const RegionThermal& bt = p.thermal_of(Material::Blood);
    const double rc_b = p.rho_b() * p.c_b();
    const double mu_eff = fl.mu_eff();
    const double mu_t = fl.mu_t();
    const double mu_a = p.optics_of(Material::Blood).mu_a;

    pt.zeta1 = bt.k * mu_eff * mu_eff / rc_b + u * mu_eff;
    pt.zeta2 = bt.k * mu_t * mu_t / rc_b + u * mu_t;
    pt.zeta3 = bt.k * mu_eff * mu_eff / rc_b + u * mu_t;

    // Lumen denominators k mu^2 + rho_b c_b mu (u + v) = rho_b c_b (zeta + mu v).
    const int col = 0, ann = 1;
    pt.terms[col][0] = {mu_a / rc_b, pt.zeta1, mu_eff, true};
    pt.terms[col][1] = {mu_a / rc_b, pt.zeta2, mu_t, true};
    pt.terms[ann][0] = {mu_a / rc_b, pt.zeta1, mu_eff, true};
    const double ann_t = reading == ParticularReading::Duhamel ? mu_a / rc_b : 1 / rc_b;
    pt.terms[ann][1] = {ann_t, pt.zeta3, mu_t, true};

    for (Material m : {Material::Wall, Material::Pad, Material::Skin}) {
        const int j = index(m) - 1;
        const RegionThermal& t = p.thermal_of(m);
        const double mej = fl.optics[index(m)].mu_eff;
        const double printed_den = t.k * mej * mej - p.c_b() * t.omega;
        const double lambda = printed_den / t.heat_capacity();
        double rate = lambda;
        if (reading == ParticularReading::PrintedSqrtRate)
            rate = std::copysign(std::sqrt(std::fabs(lambda)), lambda);
        pt.outer_rate[j] = rate;
        for (int f = 0; f < 2; ++f) {
            const double mu = f == 0 ? mu_eff : mu_t;
            ParticularTerm& term = pt.terms[2 + j][f];
            term.rate = rate;
            term.mu = mu;
            if (reading == ParticularReading::Duhamel) {
                term.amplitude = p.optics_of(m).mu_a / t.heat_capacity();
                term.normalized = true;
            } else {
                if (printed_den == 0)
                    throw DegenerateDenominator(std::string("k mu_eff^2 = c_b omega in region ") +
                                                name(m));
                term.amplitude = 1 / printed_den;
                term.normalized = false;
            }
        }
    }
    return pt;
}

double Mode::shape(double r, const Geometry& g) const {
    if (r < g.r_i) return 0;
    const RegionId reg = region_of(r, g);
    if (reg == RegionId::Wall) {
        const RegionShape s = region_shape(beta1_sq[0]);
        return A1w * wall_value(s.kind, s.b, g.r_i, r);
    }
    const int j = reg == RegionId::Pad ? 1 : 2;
    const RegionShape s = region_shape(beta1_sq[j]);
    const Pair p = radial_pair(s.kind, s.b, r);
    return j == 1 ? A1p * p.first + A2p * p.second : A1s * p.first + A2s * p.second;
}

double Mode::shape_derivative(double r, const Geometry& g) const {
    if (r < g.r_i) return 0;
    const RegionId reg = region_of(r, g);
    if (reg == RegionId::Wall) {
        const RegionShape s = region_shape(beta1_sq[0]);
        return A1w * wall_derivative(s.kind, s.b, g.r_i, r);
    }
    const int j = reg == RegionId::Pad ? 1 : 2;
    const RegionShape s = region_shape(beta1_sq[j]);
    const Pair d = radial_pair_derivative(s.kind, s.b, r);
    return j == 1 ? A1p * d.first + A2p * d.second : A1s * d.first + A2s * d.second;
}

ModalContext modal_context(const ParameterSet& p) {
    ModalContext ctx;
    ctx.geo = p.geo;
    ctx.tissue = {p.thermal_of(Material::Wall), p.thermal_of(Material::Pad),
                  p.thermal_of(Material::Skin)};
    ctx.c_b = p.c_b();
    ctx.h_air = p.protocol.h_air;
    return ctx;
}

double modal_transfer(const ModalContext& ctx, double eta, double zeta) {
    return build_mode(ctx, eta, zeta).robin;
}

std::vector<Mode> modal_eigenvalues(const ModalContext& ctx, int m, double zeta_max, int n_roots) {
    const double eta = m * kPi / (2 * ctx.geo.L);
    // Uniform grid in sigma = sqrt(-zeta), where roots are roughly evenly spaced.
    const double sigma_max = std::sqrt(zeta_max);
    constexpr double kStep = 2e-4;
    const int n = std::max(16, static_cast<int>(std::ceil(sigma_max / kStep)));
    auto f = [&](double sigma) { return modal_transfer(ctx, eta, -sigma * sigma); };

    std::vector<Mode> modes;
    double s_prev = 1e-9;
    double f_prev = f(s_prev);
    for (int i = 1; i <= n && static_cast<int>(modes.size()) < n_roots; ++i) {
        const double s_cur = sigma_max * i / n;
        const double f_cur = f(s_cur);
        if (f_prev == 0 || (f_prev < 0) != (f_cur < 0)) {
            double lo = s_prev, hi = s_cur, flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double sigma = 0.5 * (lo + hi);
            const double froot = f(sigma);
            // A genuine root is smaller than both bracket ends; a pole is not.
            if (std::fabs(froot) <= std::max(std::fabs(f_prev), std::fabs(f_cur))) {
                Mode md = build_mode(ctx, eta, -sigma * sigma).mode;
                md.m = m;
                modes.push_back(md);
            }
        }
        s_prev = s_cur;
        f_prev = f_cur;
    }
    if (static_cast<int>(modes.size()) < n_roots)
        throw BracketExhausted(static_cast<int>(modes.size()), n_roots);
    return modes;
}

std::vector<Mode> modal_eigenvalues(const ModalContext& ctx, int m, int n_roots) {
    double zeta_max = 1.0;
    for (int attempt = 0; attempt < 12; ++attempt, zeta_max *= 2) {
        try {
            return modal_eigenvalues(ctx, m, zeta_max, n_roots);
        } catch (const BracketExhausted&) {
        }
    }
    return modal_eigenvalues(ctx, m, zeta_max, n_roots);
}

namespace {

// Basis {I0(q r), K0(q r)}, or {1, ln r} without perfusion.
Pair offset_basis(double q, double r) {
    if (q == 0) return {1.0, std::log(r)};
    return {specfn::i0(q * r), specfn::k0(q * r)};
}

Pair offset_basis_derivative(double q, double r) {
    if (q == 0) return {0.0, 1 / r};
    return {q * specfn::i1(q * r), -q * specfn::k1(q * r)};
}

}  // namespace

double SteadyOffset::eval(double r) const {
    if (r < geo.r_i) return 0;
    const int j = index(material_of(region_of(r, geo))) - 1;
    const Pair b = offset_basis(region[j].q, r);
    return region[j].A1 * b.first + region[j].A2 * b.second;
}

double SteadyOffset::derivative(double r) const {
    if (r < geo.r_i) return 0;
    const int j = index(material_of(region_of(r, geo))) - 1;
    const Pair b = offset_basis_derivative(region[j].q, r);
    return region[j].A1 * b.first + region[j].A2 * b.second;
}

SteadyOffset steady_robin_offset(const ParameterSet& p) {
    SteadyOffset off;
    off.geo = p.geo;
    const Geometry& g = p.geo;
    std::array<double, 3> k{};
    for (Material m : {Material::Wall, Material::Pad, Material::Skin}) {
        const int j = index(m) - 1;
        const GenericPDEParams pde = pde_params(p, m);
        off.region[j].q = std::sqrt(pde.B / pde.a);
        k[j] = pde.a;
    }
    const double gamma = p.protocol.T_air - p.protocol.T_b;
    const double h = p.protocol.h_air;

    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    const Pair clamp = offset_basis(off.region[0].q, g.r_i);
    A(0, 0) = clamp.first;
    A(0, 1) = clamp.second;
    const std::array<double, 2> radii = {g.r_w(), g.r_p};
    for (int i = 0; i < 2; ++i) {
        const double r = radii[i];
        const Pair a = offset_basis(off.region[i].q, r);
        const Pair ad = offset_basis_derivative(off.region[i].q, r);
        const Pair b = offset_basis(off.region[i + 1].q, r);
        const Pair bd = offset_basis_derivative(off.region[i + 1].q, r);
        const int row = 1 + 2 * i, c = 2 * i;
        A(row, c) = a.first;
        A(row, c + 1) = a.second;
        A(row, c + 2) = -b.first;
        A(row, c + 3) = -b.second;
        A(row + 1, c) = k[i] * ad.first;
        A(row + 1, c + 1) = k[i] * ad.second;
        A(row + 1, c + 2) = -k[i + 1] * bd.first;
        A(row + 1, c + 3) = -k[i + 1] * bd.second;
    }
    const Pair sv = offset_basis(off.region[2].q, g.r_s);
    const Pair sd = offset_basis_derivative(off.region[2].q, g.r_s);
    A(5, 4) = k[2] * sd.first + h * sv.first;
    A(5, 5) = k[2] * sd.second + h * sv.second;
    rhs(5) = h * gamma;

    const Eigen::Matrix<double, 6, 1> x = Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>>(A).solve(rhs);
    for (int j = 0; j < 3; ++j) {
        off.region[j].A1 = x(2 * j);
        off.region[j].A2 = x(2 * j + 1);
    }
    return off;
}

QuadratureRule projection_rule(const Geometry& g, int per_region) {
    if (per_region < 2 || per_region % 2) throw DomainError("Simpson needs an even interval count");
    QuadratureRule q;
    const std::array<double, 4> edges = {g.r_i, g.r_w(), g.r_p, g.r_s};
    for (int seg = 0; seg < 3; ++seg) {
        const double a = edges[seg], b = edges[seg + 1];
        const double h = (b - a) / per_region;
        for (int i = 0; i <= per_region; ++i) {
            // Interior edge nodes are nudged inside so they evaluate in this region.
            double r = a + i * h;
            if (i == per_region && seg < 2) r = std::nextafter(b, a);
            const double w = (i == 0 || i == per_region) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            q.nodes.push_back(r);
            q.weights.push_back(w * h / 3);
        }
    }
    return q;
}

void project_initial(std::vector<Mode>& modes, const ModalContext& ctx,
                     const std::function<double(double)>& target, int per_region) {
    const int n = static_cast<int>(modes.size());
    if (n == 0) return;
    const QuadratureRule q = projection_rule(ctx.geo, per_region);
    Eigen::MatrixXd shapes(q.nodes.size(), n);
    Eigen::VectorXd w(q.nodes.size()), rhs_t(q.nodes.size());
    for (size_t i = 0; i < q.nodes.size(); ++i) {
        const double r = q.nodes[i];
        const int j = index(material_of(region_of(r, ctx.geo))) - 1;
        w(i) = q.weights[i] * ctx.tissue[j].heat_capacity() * r;
        rhs_t(i) = target(r);
        for (int k = 0; k < n; ++k) shapes(i, k) = modes[k].shape(r, ctx.geo);
    }
    const Eigen::MatrixXd G = shapes.transpose() * w.asDiagonal() * shapes;
    const Eigen::VectorXd rhs = shapes.transpose() * (w.cwiseProduct(rhs_t));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream os;
        os << "projection Gram matrix is rank deficient (rcond " << rc << ")";
        throw RankDeficient(os.str());
    }
    const Eigen::VectorXd a = lu.solve(rhs);
    for (int k = 0; k < n; ++k) modes[k].weight = a(k);
}

double TemperatureSolution::particular_part(double r, double z, double t) const {
    const RegionId reg = region_of(r, params.geo);
    const int ri = static_cast<int>(reg);
    double total = 0;
    for (int f = 0; f < 2; ++f) {
        const ParticularTerm& term = particular.terms[ri][f];
        const double R = fluence.radial(f == 0 ? Family::MuEff : Family::MuT, r);
        if (R == 0 || term.amplitude == 0) continue;
        const double k =
            term.normalized ? shifted_duhamel(term.rate, term.mu * particular.v, t, -term.mu * z)
                            : particular_kernel(term.rate, term.mu, particular.v, z, t);
        total += term.amplitude * R * k;
    }
    return total;
}

double TemperatureSolution::modal_part(double r, double z, double t) const {
    if (r < params.geo.r_i) return 0;
    double total = 0;
    for (const Mode& md : modes) {
        if (md.weight == 0) continue;
        total += md.weight * md.shape(r, params.geo) * std::cos(md.eta * (params.geo.L - z)) *
                 std::exp(md.zeta * t);
    }
    return total;
}

TemperatureSolution build_temperature(const ParameterSet& p) {
    return build_temperature(p, assemble_and_solve(p));
}

TemperatureSolution build_temperature(const ParameterSet& p, const FluenceSolution& fl) {
    TemperatureSolution sol;
    sol.params = p;
    sol.fluence = fl;
    sol.particular = particular_terms(fl, p, p.model.reading);
    sol.offset = steady_robin_offset(p);
    const ModalContext ctx = modal_context(p);
    sol.modes = modal_eigenvalues(ctx, 0, p.model.modes);
    const SteadyOffset& off = sol.offset;
    project_initial(sol.modes, ctx, [&off](double r) { return -off.eval(r); });
    if (p.protocol.flow_case() == 2) {
        sol.warnings.push_back(
            "flow case: the lumen modal correction with the convective axial family is not "
            "assembled; tissue modes and particular terms only");
    }
    return sol;
}

double eval_temperature(const TemperatureSolution& sol, double r, double z, double t) {
    const Geometry& g = sol.params.geo;
    if (!(r >= 0 && r <= g.r_s) || !(z >= -g.L && z <= g.L) ||
        !(t >= 0 && t <= sol.params.protocol.t_end)) {
        std::ostringstream os;
        os << "temperature evaluated outside the domain at (r, z, t) = (" << r << ", " << z
           << ", " << t << ")";
        throw DomainError(os.str());
    }
    return sol.params.protocol.T_b + sol.particular_part(r, z, t) + sol.offset.eval(r) +
           sol.modal_part(r, z, t);
}

double eval_Z_general(double b, double a, double eta, double L, double z) {
    if (!(a > 0)) throw DomainError("eval_Z_general needs a > 0");
    const double S = std::sqrt(b * b + 4 * a * a * eta * eta);
    const double X = S / (2 * a);
    return std::exp(b * z / (2 * a)) * (b * std::sinh(X * (L - z)) + S * std::cosh(X * (L - z)));
}

}  // namespace evla
