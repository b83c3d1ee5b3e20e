#include <doctest.h>

#include <cmath>

#include "evla/damage.hpp"
#include "evla/errors.hpp"

using namespace evla;

namespace {

DamageParams dp(Material m) { return damage_params(registry_thermal(m)); }

double kelvin(double c) { return c + 273.15; }

}  // namespace

TEST_CASE("constant temperature matches the closed form") {
    const DamageParams p = dp(Material::Wall);
    const TemperaturePath T = [](double) { return 80.0; };
    const double exact = p.A * 10 * std::exp(-p.E_a / (constants::R_gas * kelvin(80)));
    CHECK(arrhenius_integral(T, 10, p, 200) == doctest::Approx(exact).epsilon(1e-12));
    // Doubling the exposure doubles the damage.
    CHECK(arrhenius_integral(T, 20, p, 200) == doctest::Approx(2 * exact).epsilon(1e-12));
}

TEST_CASE("body temperature causes negligible damage") {
    const TemperaturePath T = [](double) { return 37.0; };
    for (Material m : kMaterials) CHECK(arrhenius_integral(T, 10, dp(m), 200) < 1e-6);
}

TEST_CASE("Boltzmann factor") {
    const DamageParams p = dp(Material::Blood);
    CHECK(boltzmann_factor(-273.15, p) == 0);
    CHECK(boltzmann_factor(-300, p) == 0);
    CHECK(boltzmann_factor(90, p) > boltzmann_factor(80, p));
}

TEST_CASE("Riemann sums bracket Simpson for monotone paths") {
    const DamageParams p = dp(Material::Pad);
    const std::vector<TemperaturePath> paths = {
        [](double t) { return 40 + 6 * t; },
        [](double t) { return 100 - 5 * t; },
    };
    for (const auto& T : paths) {
        const double omega = arrhenius_integral(T, 10, p, 512);
        for (int M : {4, 16, 64}) {
            const RiemannBounds b = riemann_bounds(T, 10, M, p);
            CHECK(b.lower <= b.upper);
            const double h = 10.0 / M;
            CHECK(p.A * h * b.lower <= omega * (1 + 1e-12));
            CHECK(omega <= p.A * h * b.upper * (1 + 1e-12));
        }
    }
}

TEST_CASE("Simpson converges at fourth order") {
    const DamageParams p = dp(Material::Skin);
    const TemperaturePath T = [](double t) { return 60 + 4 * std::sin(t); };
    const double ref = arrhenius_integral(T, 10, p, 4096);
    const double e1 = std::fabs(arrhenius_integral(T, 10, p, 20) - ref);
    const double e2 = std::fabs(arrhenius_integral(T, 10, p, 40) - ref);
    CHECK(std::log2(e1 / e2) == doctest::Approx(4).epsilon(0.05));
}

TEST_CASE("additivity and monotonicity in time") {
    const DamageParams p = dp(Material::Wall);
    const TemperaturePath T = [](double t) { return 50 + 3 * t; };
    const double whole = arrhenius_integral(T, 10, p, 800);
    const TemperaturePath shifted = [&](double t) { return T(t + 4); };
    const double split = arrhenius_integral(T, 4, p, 800) + arrhenius_integral(shifted, 6, p, 800);
    CHECK(split == doctest::Approx(whole).epsilon(1e-9));
    double prev = 0;
    for (int k = 1; k <= 20; ++k) {
        const double w = arrhenius_integral(T, 0.5 * k, p, 200);
        CHECK(w > prev);
        prev = w;
    }
}

TEST_CASE("published critical times are reproduced") {
    for (const Table3Row& row : table3_reference()) {
        const TimeBound b = t_crit_upper_bound(row.T_min, dp(row.material));
        CHECK_FALSE(b.overflow);
        CHECK(std::fabs(b.seconds - row.published) <= 0.05 * row.published);
    }
}

TEST_CASE("critical time bound edge cases") {
    const TimeBound cold = t_crit_upper_bound(-273.0, dp(Material::Skin));
    CHECK(cold.overflow);
    CHECK(std::isinf(cold.seconds));
    CHECK_THROWS_AS(t_crit_upper_bound(-273.15, dp(Material::Skin)), DomainError);
    CHECK_THROWS_AS(t_crit_upper_bound(-400, dp(Material::Skin)), DomainError);
}

TEST_CASE("critical time search") {
    const DamageParams p = dp(Material::Wall);
    const TemperaturePath T = [](double) { return 75.0; };
    const double omega_end = arrhenius_integral(T, 10, p, 200);
    const auto t = find_t_crit(T, 10, p, omega_end);
    REQUIRE(t);
    CHECK(*t == doctest::Approx(10).epsilon(1e-5));
    CHECK_FALSE(find_t_crit([](double) { return 37.0; }, 10, p));
}

TEST_CASE("damage map") {
    const ParameterSet params = default_parameters(810, 15);
    const std::vector<std::array<double, 2>> pts = {{0.5, 0}, {2.0, 1}, {8, -2}, {15, 3}};
    DamageMapOptions opt;

    const auto body = damage_map([](double, double, double) { return 37.0; }, params, pts, opt);
    REQUIRE(body.size() == pts.size());
    for (const DamagePoint& d : body) CHECK_FALSE(d.t_crit);

    const auto warm = damage_map([](double, double, double t) { return 60 + 4 * t; }, params, pts, opt);
    const auto hot = damage_map([](double, double, double t) { return 70 + 4 * t; }, params, pts, opt);
    for (size_t k = 0; k < pts.size(); ++k) {
        CHECK(warm[k].r == pts[k][0]);
        CHECK(warm[k].z == pts[k][1]);
        CHECK(hot[k].omega >= warm[k].omega);
        if (warm[k].t_crit) {
            REQUIRE(hot[k].t_crit);
            CHECK(*hot[k].t_crit <= *warm[k].t_crit);
        }
    }
}
