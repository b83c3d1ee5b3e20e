#include <doctest.h>

#include <cmath>

#include "evla/errors.hpp"
#include "evla/scenario.hpp"
#include "evla/thermal.hpp"

using namespace evla;

namespace {

ParameterSet preset(const char* n) { return scenario_parameters(find_preset(n)); }

const TemperatureSolution& solution810() {
    static const TemperatureSolution sol = build_temperature(preset("810-15w"));
    return sol;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_CASE("lumen rates without flow") {
    const ParameterSet p = preset("810-15w");
    const FluenceSolution fl = assemble_and_solve(p);
    const ParticularTerms pt = particular_terms(fl, p, ParticularReading::PrintedLinearRate);
    // k mu^2 / (rho c) with k = 0.52e-3, rho c = 1060e-9 * 3600.
    const double rc = 1060e-9 * 3600;
    CHECK(rel(pt.zeta1, 0.52e-3 * fl.mu_eff() * fl.mu_eff() / rc) < 1e-14);
    CHECK(rel(pt.zeta2, 0.52e-3 * fl.mu_t() * fl.mu_t() / rc) < 1e-14);
    CHECK(pt.zeta3 == pt.zeta1);
    CHECK(pt.zeta1 == doctest::Approx(0.0806981).epsilon(1e-6));
    CHECK(pt.zeta2 == doctest::Approx(730.358).epsilon(1e-6));
}

TEST_CASE("flow adds u mu to the lumen rates") {
    ParameterSet p = preset("810-15w");
    const FluenceSolution fl = assemble_and_solve(p);
    const ParticularTerms still = particular_terms(fl, p, p.model.reading);
    apply_flow_case(p, 2);
    const ParticularTerms flow = particular_terms(fl, p, p.model.reading);
    const double u = kCase2BloodVelocity;
    CHECK(rel(flow.zeta1 - still.zeta1, u * fl.mu_eff()) < 1e-12);
    CHECK(rel(flow.zeta2 - still.zeta2, u * fl.mu_t()) < 1e-12);
    CHECK(rel(flow.zeta3 - still.zeta3, u * fl.mu_t()) < 1e-12);
    // Positive rates: the lumen terms grow faster with flow rather than decay.
    CHECK(flow.zeta1 > still.zeta1);
}

TEST_CASE("particular terms vanish at t = 0 for every reading") {
    const ParameterSet p = preset("980-15w");
    const FluenceSolution fl = assemble_and_solve(p);
    TemperatureSolution sol = build_temperature(p, fl);
    for (ParticularReading reading : {ParticularReading::PrintedLinearRate,
                                      ParticularReading::PrintedSqrtRate, ParticularReading::Duhamel}) {
        sol.particular = particular_terms(fl, p, reading);
        for (double r : {0.0, 0.2, 2.0, 4.0, 8.0, 16.0})
            for (double z : {-5.0, 0.0, 5.0}) CHECK(sol.particular_part(r, z, 0) == 0);
    }
}

TEST_CASE("sqrt reading keeps the sign of the linear rate") {
    const ParameterSet p = preset("810-15w");
    const FluenceSolution fl = assemble_and_solve(p);
    const ParticularTerms lin = particular_terms(fl, p, ParticularReading::PrintedLinearRate);
    const ParticularTerms sq = particular_terms(fl, p, ParticularReading::PrintedSqrtRate);
    for (int j = 0; j < 3; ++j) {
        CHECK(rel(std::fabs(sq.outer_rate[j]), std::sqrt(std::fabs(lin.outer_rate[j]))) < 1e-14);
        CHECK((sq.outer_rate[j] < 0) == (lin.outer_rate[j] < 0));
    }
}

TEST_CASE("kernels") {
    // Bare difference against the direct form where it is well conditioned.
    for (double rate : {-0.3, 0.01, 0.2})
        for (double t : {0.1, 2.0, 9.0}) {
            const double mu = 0.8, v = 1, z = 0.7;
            const double direct = std::exp(-mu * z) * (std::exp(rate * t) - std::exp(-mu * v * t));
            CHECK(rel(particular_kernel(rate, mu, v, z, t), direct) < 1e-12);
        }
    CHECK(particular_kernel(0.3, 0.5, 1, 0, 1e-12) == doctest::Approx(0.8e-12).epsilon(1e-6));
    // Normalized kernel and its limit at rate = -d.
    CHECK(rel(duhamel_kernel(0.2, 0.5, 3), (std::exp(0.6) - std::exp(-1.5)) / 0.7) < 1e-13);
    CHECK(rel(duhamel_kernel(-0.5, 0.5, 3), 3 * std::exp(-1.5)) < 1e-13);
    CHECK(rel(duhamel_kernel(-0.5 + 1e-12, 0.5, 3), 3 * std::exp(-1.5)) < 1e-9);
    CHECK(duhamel_kernel(0.2, 0.5, 0) == 0);
}

TEST_CASE("axial profile") {
    const double a = 0.5, L = 10;
    // b = 0 reduces to a scaled cosh.
    for (double z : {-10.0, -3.0, 0.0, 7.0}) {
        const double eta = 0.2;
        CHECK(rel(eval_Z_general(0, a, eta, L, z), 2 * a * eta * std::cosh(eta * (L - z))) < 1e-13);
    }
    for (double eta : {0.1, 0.4}) {
        const double h = 1e-4, b = 0.3;
        const double d = (eval_Z_general(b, a, eta, L, L + h) - eval_Z_general(b, a, eta, L, L - h)) / (2 * h);
        CHECK(std::fabs(d) <= 1e-6 * std::fabs(eval_Z_general(b, a, eta, L, L)));
    }
    // b = 2a, eta = 0 is even about z = L.
    for (double h : {1e-2, 0.5, 3.0})
        CHECK(rel(eval_Z_general(2 * a, a, 0, L, L + h), eval_Z_general(2 * a, a, 0, L, L - h)) < 1e-12);
    CHECK_THROWS_AS(eval_Z_general(1, 0, 1, L, 0), DomainError);
}

TEST_CASE("modes satisfy dispersion, clamp, continuity and Robin conditions") {
    const ParameterSet p = preset("810-15w");
    const ModalContext ctx = modal_context(p);
    const Geometry& g = p.geo;
    for (int m : {0, 1, 3}) {
        const std::vector<Mode> modes = modal_eigenvalues(ctx, m, 12);
        REQUIRE(modes.size() == 12);
        for (size_t n = 0; n < modes.size(); ++n) {
            const Mode& md = modes[n];
            CHECK(md.zeta < 0);
            if (n > 0) CHECK(md.zeta < modes[n - 1].zeta);
            for (int j = 0; j < 3; ++j) {
                const RegionThermal& t = ctx.tissue[j];
                const double lhs = t.heat_capacity() * md.zeta;
                const double rhs = -t.k * (md.beta1_sq[j] + md.eta * md.eta) - ctx.c_b * t.omega;
                CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::fabs(lhs));
            }
            CHECK(md.shape(g.r_i, g) == doctest::Approx(0).scale(1));
            CHECK(md.shape_derivative(g.r_i, g) == doctest::Approx(1).epsilon(1e-12));
            const double k[3] = {ctx.tissue[0].k, ctx.tissue[1].k, ctx.tissue[2].k};
            const double rr[2] = {g.r_w(), g.r_p};
            for (int i = 0; i < 2; ++i) {
                const double below = md.shape(std::nextafter(rr[i], 0.0), g);
                const double above = md.shape(rr[i], g);
                const double scale = std::max({std::fabs(below), std::fabs(above), 1e-3 * g.r_i});
                CHECK(std::fabs(below - above) <= 1e-8 * scale);
                const double fb = k[i] * md.shape_derivative(std::nextafter(rr[i], 0.0), g);
                const double fa = k[i + 1] * md.shape_derivative(rr[i], g);
                CHECK(std::fabs(fb - fa) <= 1e-8 * std::max({std::fabs(fb), std::fabs(fa), 1e-3 * k[0]}));
            }
            const double robin = k[2] * md.shape_derivative(g.r_s, g) + ctx.h_air * md.shape(g.r_s, g);
            const double scale = k[2] * std::fabs(md.shape_derivative(g.r_s, g)) + ctx.h_air * std::fabs(md.shape(g.r_s, g));
            CHECK(std::fabs(robin) <= 1e-8 * std::max(scale, 1e-3 * k[0]));
        }
    }
}

TEST_CASE("root count grows with the rate bracket") {
    const ModalContext ctx = modal_context(preset("810-15w"));
    auto count = [&](double zeta_max) {
        try {
            return static_cast<int>(modal_eigenvalues(ctx, 0, zeta_max, 1000).size());
        } catch (const BracketExhausted& e) {
            return e.found();
        }
    };
    int prev = 0;
    for (double zmax : {0.01, 0.05, 0.2, 1.0}) {
        const int c = count(zmax);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(prev > count(0.01));
}

TEST_CASE("steady offset") {
    ParameterSet p = preset("810-15w");
    const SteadyOffset off = steady_robin_offset(p);
    const Geometry& g = p.geo;
    const RegionThermal& skin = p.thermal_of(Material::Skin);
    const double gamma = p.protocol.T_air - p.protocol.T_b;
    const double robin = skin.k * off.derivative(g.r_s) + p.protocol.h_air * (off.eval(g.r_s) - gamma);
    CHECK(std::fabs(robin) <= 1e-10 * p.protocol.h_air * std::fabs(gamma));
    CHECK(off.eval(g.r_s) < 0);
    CHECK(off.eval(g.r_i) == doctest::Approx(0).scale(1));

    p.protocol.T_air = p.protocol.T_b;
    const SteadyOffset zero = steady_robin_offset(p);
    for (const OffsetRegion& r : zero.region) {
        CHECK(r.A1 == 0);
        CHECK(r.A2 == 0);
    }
}

TEST_CASE("projection") {
    const ParameterSet p = preset("810-15w");
    const ModalContext ctx = modal_context(p);
    std::vector<Mode> modes = modal_eigenvalues(ctx, 0, 8);
    project_initial(modes, ctx, [](double) { return 0.0; });
    for (const Mode& m : modes) CHECK(m.weight == 0);

    const SteadyOffset off = steady_robin_offset(p);
    const QuadratureRule q = projection_rule(p.geo);
    double prev = 1e300;
    for (int n : {2, 5, 10, 20}) {
        std::vector<Mode> ms = modal_eigenvalues(ctx, 0, n);
        project_initial(ms, ctx, [&off](double r) { return -off.eval(r); });
        double res = 0;
        for (size_t k = 0; k < q.nodes.size(); ++k) {
            const double r = q.nodes[k];
            double s = off.eval(r);
            for (const Mode& m : ms) s += m.weight * m.shape(r, p.geo);
            const RegionThermal& t = p.thermal_of(material_of(region_of(r, p.geo)));
            res += q.weights[k] * t.heat_capacity() * r * s * s;
        }
        CHECK(res <= prev * (1 + 1e-12));
        prev = res;
    }
}

TEST_CASE("initial temperature and skin Robin condition") {
    const TemperatureSolution& sol = solution810();
    const ParameterSet& p = sol.params;
    const double gamma = std::fabs(p.protocol.T_air - p.protocol.T_b);
    double worst = 0;
    for (int i = 0; i <= 400; ++i) {
        const double r = p.geo.r_s * i / 400;
        worst = std::max(worst, std::fabs(eval_temperature(sol, r, 0.3, 0) - p.protocol.T_b));
    }
    CHECK(worst <= 0.01 * gamma);

    // Offset plus modal part meet the Robin condition at the skin surface.
    const RegionThermal& skin = p.thermal_of(Material::Skin);
    const double r = p.geo.r_s;
    for (double t : {0.0, 1.0, 5.0, 10.0}) {
        double value = sol.offset.eval(r) + sol.modal_part(r, 0, t);
        double slope = sol.offset.derivative(r);
        for (const Mode& m : sol.modes) slope += m.weight * m.shape_derivative(r, p.geo) * std::exp(m.zeta * t);
        const double resid = skin.k * slope + p.protocol.h_air * (p.protocol.T_b + value - p.protocol.T_air);
        CHECK(std::fabs(resid) <= 1e-3 * p.protocol.h_air * gamma);
    }
}

TEST_CASE("modal part has zero axial flux at both ends") {
    const TemperatureSolution& sol = solution810();
    const double L = sol.params.geo.L, h = 1e-4;
    for (double r : {4.0, 8.0, 16.0}) {
        const double top = (sol.modal_part(r, L, 2) - sol.modal_part(r, L - h, 2)) / h;
        const double bottom = (sol.modal_part(r, -L + h, 2) - sol.modal_part(r, -L, 2)) / h;
        CHECK(std::fabs(top) <= 1e-9);
        CHECK(std::fabs(bottom) <= 1e-9);
    }
}

TEST_CASE("wall temperature ahead of the tip does not decrease") {
    ParameterSet p = preset("810-15w");
    for (ParticularReading reading : {ParticularReading::PrintedLinearRate,
                                      ParticularReading::PrintedSqrtRate, ParticularReading::Duhamel}) {
        p.model.reading = reading;
        const TemperatureSolution sol = build_temperature(p);
        for (double r : {p.geo.r_i + 0.1, 5.0}) {
            double prev = eval_temperature(sol, r, 2, 0);
            for (int k = 1; k <= 100; ++k) {
                const double now = eval_temperature(sol, r, 2, 0.1 * k);
                CHECK(std::isfinite(now));
                CHECK(now >= prev - 1e-9 * std::fabs(prev));
                prev = now;
            }
        }
    }
}

TEST_CASE("lumen particular term overflows at the printed rate") {
    // exp(zeta2 t) with zeta2 near 730/s leaves double range within a second.
    const TemperatureSolution& sol = solution810();
    CHECK_FALSE(std::isfinite(eval_temperature(sol, 0, 2, 2)));
}

TEST_CASE("flow case keeps tissue modes and warns") {
    ParameterSet p = preset("810-15w");
    apply_flow_case(p, 2);
    const TemperatureSolution sol = build_temperature(p);
    CHECK(sol.warnings.size() == 1);
    CHECK(sol.modes.size() == static_cast<size_t>(p.model.modes));
}

TEST_CASE("temperature domain checks") {
    const TemperatureSolution& sol = solution810();
    CHECK_THROWS_AS(eval_temperature(sol, -0.1, 0, 0), DomainError);
    CHECK_THROWS_AS(eval_temperature(sol, 1, 0, 11), DomainError);
}
