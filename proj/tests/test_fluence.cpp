#include <doctest.h>

#include <cmath>

#include "evla/errors.hpp"
#include "evla/fluence.hpp"
#include "evla/scenario.hpp"

using namespace evla;

namespace {

ParameterSet preset(const char* n) { return scenario_parameters(find_preset(n)); }

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_CASE("source amplitude for blood at 810 nm, g = 0") {
    ParameterSet p = preset("810-15w");
    RegionOptics blood = p.optics_of(Material::Blood);
    blood.g = 0;
    const SourceTerm s = build_source(p.protocol, p.geo, blood);
    // 15 / (pi 0.09) * 0.73
    CHECK(s.S0 == doctest::Approx(38.7277028).epsilon(1e-8));
    CHECK(s.eval(p.geo.r_f, 0, 0) == 0);
    const double a = s.eval(0.1, 1.0, 0.5), b = s.eval(0.1, 1.3, 0.5);
    CHECK(rel(b / a, std::exp(-s.mu_t_blood * 0.3)) < 1e-14);
    CHECK(s.eval(0.1, 0, 2) == s.eval(0.1, 2 * p.protocol.v, 0));
}

TEST_CASE("branch kinds per wavelength") {
    const BranchFactors b810 = branch_factors(preset("810-15w"));
    CHECK(b810.w_kind[0] == WKind::Modified);
    CHECK(b810.w_kind[1] == WKind::Standard);
    CHECK(b810.w_kind[2] == WKind::Modified);
    const BranchFactors b980 = branch_factors(preset("980-15w"));
    CHECK(b980.w_kind[0] == WKind::Modified);
    CHECK(b980.w_kind[1] == WKind::Standard);
    CHECK(b980.w_kind[2] == WKind::Standard);
    const BranchFactors b1064 = branch_factors(preset("1064-10w"));
    CHECK(b1064.w_kind[0] == WKind::Modified);
    CHECK(b1064.w_kind[2] == WKind::Modified);
    for (int j = 0; j < 3; ++j) {
        CHECK(b810.kappa[j] > 0);
        CHECK(b810.beta[j] > 0);
    }
}

TEST_CASE("small anisotropy makes a beta radicand non-positive") {
    ParameterSet p = preset("810-15w");
    p.optics[index(Material::Blood)].g = 0;
    CHECK_THROWS_AS(branch_factors(p), NonPositiveRadicand);
}

TEST_CASE("interface continuity for every preset") {
    for (const Scenario& s : presets()) {
        const FluenceSolution sol = assemble_and_solve(scenario_parameters(s));
        for (double t : {0.0, 5.0, 10.0}) {
            const ContinuityReport c = continuity_residuals(sol, 100, t);
            CHECK(c.value_jump <= 1e-9);
            CHECK(c.flux_jump <= 1e-9);
        }
    }
}

TEST_CASE("zero-flux closure also satisfies continuity") {
    ParameterSet p = preset("980-15w");
    p.model.closure = OuterClosure::ZeroFlux;
    const FluenceSolution sol = assemble_and_solve(p);
    const ContinuityReport c = continuity_residuals(sol, 50, 0);
    CHECK(c.value_jump <= 1e-9);
    CHECK(c.flux_jump <= 1e-9);
    CHECK(std::fabs(sol.radial_derivative(Family::MuT, p.geo.r_s)) <=
          1e-9 * std::fabs(sol.radial(Family::MuT, p.geo.r_s - 1)));
}

TEST_CASE("zero-value closure pins the attenuated family at the skin surface") {
    const FluenceSolution sol = assemble_and_solve(preset("810-15w"));
    CHECK(std::fabs(sol.radial(Family::MuT, sol.params.geo.r_s)) <= 1e-9 * sol.P_in);
}

TEST_CASE("tip irradiance normalization") {
    for (const Scenario& s : presets()) {
        const ParameterSet p = scenario_parameters(s);
        const FluenceSolution sol = assemble_and_solve(p);
        const double irradiance = p.protocol.P_laser / (M_PI * p.geo.r_f * p.geo.r_f);
        for (double t : {0.0, 4.0, 10.0})
            CHECK(rel(eval_fluence(sol, 0, -p.protocol.v * t, t), irradiance) < 1e-12);
    }
}

TEST_CASE("coefficients are linear in power") {
    ParameterSet a = preset("980-15w"), b = preset("980-10w");
    const auto ca = assemble_and_solve(a).coefficients();
    const auto cb = assemble_and_solve(b).coefficients();
    REQUIRE(ca.size() == cb.size());
    for (size_t k = 0; k < ca.size(); ++k) {
        if (cb[k].value == 0) continue;
        INFO(ca[k].name, " ", ca[k].region);
        CHECK(rel(ca[k].value / cb[k].value, 1.5) < 1e-12);
    }
}

TEST_CASE("translation covariance") {
    const FluenceSolution sol = assemble_and_solve(preset("810-15w"));
    const double v = sol.v();
    for (double r : {0.1, 1.0, 4.0, 10.0, 16.0})
        for (double z : {-3.0, 0.0, 2.5})
            for (double s : {0.0, 1.0, 3.0}) {
                const double t = 5;
                const double a = eval_fluence(sol, r, z, t), b = eval_fluence(sol, r, z + v * s, t - s);
                CHECK(std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), 1e-300));
            }
}

TEST_CASE("on-axis fluence decreases ahead of its peak") {
    const FluenceSolution sol = assemble_and_solve(preset("810-15w"));
    const double me = sol.mu_eff(), mt = sol.mu_t();
    // Peak of B0 e^{-me s} - P_in e^{-mt s}.
    const double s_star = std::log(mt * sol.P_in / (me * sol.B0)) / (mt - me);
    CHECK(s_star > 0);
    CHECK(s_star < 0.1);
    for (double t : {0.0, 5.0, 10.0}) {
        double prev = eval_fluence(sol, 0, -sol.v() * t + s_star, t);
        for (double s = s_star + 0.01; -sol.v() * t + s <= sol.params.geo.L; s += 0.05) {
            const double now = eval_fluence(sol, 0, -sol.v() * t + s, t);
            CHECK(now < prev);
            prev = now;
        }
    }
}

TEST_CASE("fluence is positive in the lumen and wall away from the tip plane") {
    // At 810 nm the attenuated Bessel family dips below zero within 0.01 mm of s = 0.
    for (const Scenario& s : presets()) {
        const FluenceSolution sol = assemble_and_solve(scenario_parameters(s));
        const Geometry& g = sol.params.geo;
        for (int i = 0; i <= 300; ++i)
            for (double z : {-10.0, -3.0, -0.5, -0.02, 0.02, 0.05, 0.2, 1.0, 4.0, 10.0}) {
                const double r = g.r_w() * i / 300;
                CHECK(eval_fluence(sol, r, z, 0) > 0);
            }
    }
}

TEST_CASE("evaluation outside the domain is rejected") {
    const FluenceSolution sol = assemble_and_solve(preset("810-15w"));
    const Geometry& g = sol.params.geo;
    CHECK_THROWS_AS(eval_fluence(sol, g.r_s + 0.1, 0, 0), DomainError);
    CHECK_THROWS_AS(eval_fluence(sol, 1, g.L + 0.1, 0), DomainError);
    CHECK_THROWS_AS(eval_fluence(sol, 1, 0, -1), DomainError);
    CHECK_THROWS_AS(eval_fluence(sol, 1, 0, sol.params.protocol.t_end + 1), DomainError);
}

TEST_CASE("transient column fluence") {
    const ParameterSet p = preset("810-15w");
    const RegionOptics& blood = p.optics_of(Material::Blood);
    CHECK(eval_fluence_transient(p.protocol, p.geo, blood, 0.1, 1.0, 0) == 0);
    CHECK_THROWS_AS(eval_fluence_transient(p.protocol, p.geo, blood, p.geo.r_f, 1.0, 0), DomainError);

    for (int wl : registry_wavelengths())
        for (Material m : kMaterials) {
            RegionOptics o = *registry_optics(m, wl);
            o.g = 0;
            CHECK(transient_rate(derive_optics(o), o) > 0);
        }

    // g = 0 blood: rate = nu (D mu_t^2 - mu_a) = (0.3e12 / 1.4) * 0.1033333 /s.
    RegionOptics o = blood;
    o.g = 0;
    const double zeta = transient_rate(derive_optics(o), o);
    CHECK(zeta == doctest::Approx(0.3e12 / 1.4 * (0.94 * 0.94 / 2.82 - 0.21)).epsilon(1e-10));
    const double doubling = std::log(2) / zeta;
    CHECK(doubling > 1e-12);
    CHECK(doubling < 1e-9);
}

TEST_CASE("radial moments match quadrature") {
    const FluenceSolution sol = assemble_and_solve(preset("810-15w"));
    for (Family f : {Family::MuEff, Family::MuT})
        for (auto [a, b] : {std::pair{0.0, 0.3}, std::pair{0.1, 4.2}, std::pair{3.0, 17.5}}) {
            const int n = 200000;
            double sum = 0;
            for (int k = 0; k < n; ++k) {
                const double r = a + (b - a) * (k + 0.5) / n;
                sum += r * sol.radial(f, r);
            }
            sum *= (b - a) / n;
            CHECK(std::fabs(sol.radial_moment(f, a, b) - sum) <= 1e-6 * (std::fabs(sum) + 1));
        }
}
