#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <stdexcept>

#include "evla/errors.hpp"
#include "evla/specfn.hpp"

namespace sf = evla::specfn;
using sf::BesselKind;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

double boost_ref(BesselKind k, double x) {
    namespace bm = boost::math;
    switch (k) {
        case BesselKind::J0: return bm::cyl_bessel_j(0, x);
        case BesselKind::J1: return bm::cyl_bessel_j(1, x);
        case BesselKind::Y0: return bm::cyl_neumann(0, x);
        case BesselKind::Y1: return bm::cyl_neumann(1, x);
        case BesselKind::I0: return bm::cyl_bessel_i(0, x);
        case BesselKind::I1: return bm::cyl_bessel_i(1, x);
        case BesselKind::K0: return bm::cyl_bessel_k(0, x);
        case BesselKind::K1: return bm::cyl_bessel_k(1, x);
    }
    return 0;
}

// Plain origin series, 30 terms, as an independent oracle.
double j0_series30(double x) {
    double term = 1, sum = 1;
    for (int k = 1; k < 30; ++k) {
        term *= -(x * x / 4) / (k * k);
        sum += term;
    }
    return sum;
}

double k0_series30(double x) {
    const double gamma = 0.57721566490153286061;
    double term = 1, harmonic = 0, i0 = 1, tail = 0;
    for (int k = 1; k < 30; ++k) {
        term *= (x * x / 4) / (k * k);
        harmonic += 1.0 / k;
        i0 += term;
        tail += term * harmonic;
    }
    return -(std::log(x / 2) + gamma) * i0 + tail;
}

constexpr BesselKind kAll[] = {BesselKind::J0, BesselKind::J1, BesselKind::Y0, BesselKind::Y1,
                               BesselKind::I0, BesselKind::I1, BesselKind::K0, BesselKind::K1};

}  // namespace

TEST_CASE("values at the origin") {
    CHECK(sf::eval(BesselKind::J0, 0) == 1);
    CHECK(sf::eval(BesselKind::I0, 0) == 1);
    CHECK(sf::eval(BesselKind::J1, 0) == 0);
    CHECK(sf::eval(BesselKind::I1, 0) == 0);
}

TEST_CASE("frozen values from the truncated series") {
    CHECK(rel(j0_series30(1), 0.765197686557967) < 1e-14);
    CHECK(rel(k0_series30(1), 0.421024438240708) < 1e-14);
    CHECK(rel(sf::j0(1), 0.765197686557967) < 1e-13);
    CHECK(rel(sf::k0(1), 0.421024438240708) < 1e-13);
}

TEST_CASE("agreement with Boost over [1e-6, 100]") {
    for (BesselKind k : kAll) {
        double worst = 0;
        for (int i = 0; i <= 800; ++i) {
            const double x = 1e-6 * std::pow(1e8, i / 800.0);
            const double ref = boost_ref(k, x);
            if (!std::isfinite(ref) || ref == 0) continue;
            // Absolute floor near zeros of the oscillatory kinds.
            const double scale = std::max(std::fabs(ref), k == BesselKind::I0 || k == BesselKind::I1 ||
                                                                   k == BesselKind::K0 || k == BesselKind::K1
                                                               ? 0.0
                                                               : 1.0 / std::sqrt(x + 1));
            worst = std::max(worst, std::fabs(sf::eval(k, x) - ref) / scale);
        }
        INFO("kind ", static_cast<int>(k));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("Y and K are singular at zero") {
    CHECK_THROWS_AS(sf::eval(BesselKind::Y0, 0), evla::DomainError);
    CHECK_THROWS_AS(sf::eval(BesselKind::K1, 0), evla::DomainError);
    CHECK_THROWS_AS(sf::eval(BesselKind::J0, -1), evla::DomainError);
    CHECK_THROWS_AS(sf::wronskian_standard(0), evla::DomainError);
    CHECK_THROWS_AS(sf::wronskian_modified(0), evla::DomainError);
}

TEST_CASE("I0 overflow is signalled") {
    CHECK_THROWS_AS(sf::eval(BesselKind::I0, 800), std::overflow_error);
}

TEST_CASE("Wronskian examples") {
    CHECK(rel(sf::wronskian_standard(1), 2 / M_PI) < 1e-12);
    CHECK(rel(sf::wronskian_standard(2), 1 / M_PI) < 1e-12);
    CHECK(rel(sf::wronskian_standard(10), 0.063661977236758) < 1e-12);
    CHECK(rel(sf::wronskian_modified(1), 1) < 1e-12);
    CHECK(rel(sf::wronskian_modified(4), 0.25) < 1e-12);
    CHECK(rel(sf::wronskian_modified(0.5), 2) < 1e-12);
}

TEST_CASE("Wronskian identities over [0.01, 50]") {
    for (int i = 0; i <= 2000; ++i) {
        const double x = 0.01 * std::pow(5000.0, i / 2000.0);
        const double ws = 2 / (M_PI * x), wm = 1 / x;
        CHECK(std::fabs(sf::wronskian_standard(x) - ws) <= 1e-10 * (1 + ws));
        CHECK(std::fabs(sf::wronskian_modified(x) - wm) <= 1e-10 * (1 + wm));
    }
}

TEST_CASE("derivative identities converge at second order") {
    struct Pair {
        BesselKind f, d;
        double sign;
    };
    const Pair pairs[] = {{BesselKind::J0, BesselKind::J1, -1},
                          {BesselKind::I0, BesselKind::I1, 1},
                          {BesselKind::K0, BesselKind::K1, -1},
                          {BesselKind::Y0, BesselKind::Y1, -1}};
    for (const Pair& p : pairs)
        for (double x : {0.7, 3.3, 12.0, 25.0}) {
            auto err = [&](double h) {
                const double fd = (sf::eval(p.f, x + h) - sf::eval(p.f, x - h)) / (2 * h);
                return std::fabs(fd - p.sign * sf::eval(p.d, x));
            };
            const double order = std::log2(err(1e-2) / err(5e-3));
            CHECK(order == doctest::Approx(2).epsilon(0.05));
        }
}

TEST_CASE("series and asymptotic regimes agree at the crossover") {
    for (BesselKind k : {BesselKind::J0, BesselKind::J1, BesselKind::Y0, BesselKind::Y1}) {
        for (double x : {16.0, 17.0, 18.0}) {
            const double s = static_cast<double>(sf::detail::series(k, x));
            const double a = sf::detail::asymptotic(k, x);
            CHECK(std::fabs(s - a) <= 1e-10 * std::max(std::fabs(a), 1.0 / std::sqrt(x)));
        }
    }
    for (int order : {0, 1}) {
        const double x = sf::asymptotic_crossover;
        const double a = sf::detail::asymptotic(order == 0 ? BesselKind::K0 : BesselKind::K1, x);
        CHECK(rel(sf::detail::k_integral(order, x), a) < 1e-10);
    }
}
