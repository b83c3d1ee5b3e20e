#include "evla/specfn.hpp"

#include <cmath>
#include <stdexcept>

#include "evla/errors.hpp"

namespace evla::specfn {

namespace {

constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr double kPi = 3.14159265358979323846;

constexpr int kMaxSeriesTerms = 60;
constexpr long double kSeriesStop = 1e-17L;

bool is_standard(BesselKind k) {
    return k == BesselKind::J0 || k == BesselKind::J1 || k == BesselKind::Y0 ||
           k == BesselKind::Y1;
}

int order_of(BesselKind k) {
    switch (k) {
        case BesselKind::J1:
        case BesselKind::Y1:
        case BesselKind::I1:
        case BesselKind::K1:
            return 1;
        default:
            return 0;
    }
}

// Order-0 sums: regular part sum t_n and logarithmic companion sum (H_n - gamma) t_n
// with t_n = (sign q)^n / (n!)^2, q = x^2/4.
struct Order0Sums {
    long double regular = 0;
    long double digamma = 0;
};

Order0Sums order0_sums(long double q, long double sign) {
    Order0Sums s;
    long double term = 1;
    long double harmonic = 0;
    s.regular = term;
    s.digamma = -kEulerGamma * term;
    for (int n = 1; n < kMaxSeriesTerms; ++n) {
        term *= sign * q / (static_cast<long double>(n) * n);
        harmonic += 1.0L / n;
        s.regular += term;
        s.digamma += (harmonic - kEulerGamma) * term;
        const long double scale = std::fmax(std::fabs(s.regular), std::fabs(s.digamma));
        if (std::fabs(term) * (1 + harmonic) <= kSeriesStop * scale) break;
    }
    return s;
}

// Order-1 sums with u_n = (sign q)^n / (n!(n+1)!); companion weight
// H_n + H_{n+1} - 2 gamma.
Order0Sums order1_sums(long double q, long double sign) {
    Order0Sums s;
    long double term = 1;
    long double h_n = 0;
    long double h_n1 = 1;
    s.regular = term;
    s.digamma = (h_n + h_n1 - 2 * kEulerGamma) * term;
    for (int n = 1; n < kMaxSeriesTerms; ++n) {
        term *= sign * q / (static_cast<long double>(n) * (n + 1));
        h_n = h_n1;
        h_n1 += 1.0L / (n + 1);
        const long double w = h_n + h_n1 - 2 * kEulerGamma;
        s.regular += term;
        s.digamma += w * term;
        const long double scale = std::fmax(std::fabs(s.regular), std::fabs(s.digamma));
        if (std::fabs(term) * (1 + std::fabs(w)) <= kSeriesStop * scale) break;
    }
    return s;
}

// Hankel-type coefficient sums c_k = a_k(nu) / x^k, truncated at the
// smallest term.
struct HankelSums {
    long double even_alternating = 0;  // c0 - c2 + c4 - ...
    long double odd_alternating = 0;   // c1 - c3 + c5 - ...
    long double alternating = 0;       // c0 - c1 + c2 - ...
    long double plain = 0;             // c0 + c1 + c2 + ...
};

HankelSums hankel_sums(int order, long double x) {
    HankelSums h;
    const long double mu = 4.0L * order * order;
    long double c = 1;
    long double prev = INFINITY;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            const long double odd = 2.0L * k - 1;
            c *= (mu - odd * odd) / (8.0L * k * x);
        }
        const long double mag = std::fabs(c);
        if (mag > prev) break;  // asymptotic series starts diverging
        prev = mag;
        const int sgn_pair = ((k / 2) % 2 == 0) ? 1 : -1;
        if (k % 2 == 0)
            h.even_alternating += sgn_pair * c;
        else
            h.odd_alternating += sgn_pair * c;
        h.alternating += (k % 2 == 0 ? 1 : -1) * c;
        h.plain += c;
        if (mag < 1e-19L) break;
    }
    return h;
}

}  // namespace

const char* name(BesselKind kind) {
    switch (kind) {
        case BesselKind::J0: return "J0";
        case BesselKind::J1: return "J1";
        case BesselKind::Y0: return "Y0";
        case BesselKind::Y1: return "Y1";
        case BesselKind::I0: return "I0";
        case BesselKind::I1: return "I1";
        case BesselKind::K0: return "K0";
        case BesselKind::K1: return "K1";
    }
    return "?";
}

namespace detail {

long double series(BesselKind kind, long double x) {
    const long double q = x * x / 4;
    const long double half = x / 2;
    switch (kind) {
        case BesselKind::J0:
            return order0_sums(q, -1).regular;
        case BesselKind::I0:
            return order0_sums(q, 1).regular;
        case BesselKind::J1:
            return half * order1_sums(q, -1).regular;
        case BesselKind::I1:
            return half * order1_sums(q, 1).regular;
        case BesselKind::Y0: {
            const auto s = order0_sums(q, -1);
            return 2 / kPiL * (s.regular * std::log(half) - s.digamma);
        }
        case BesselKind::K0: {
            const auto s = order0_sums(q, 1);
            return -s.regular * std::log(half) + s.digamma;
        }
        case BesselKind::Y1: {
            const auto s = order1_sums(q, -1);
            return -2 / (kPiL * x) + 2 / kPiL * std::log(half) * half * s.regular -
                   half / kPiL * s.digamma;
        }
        case BesselKind::K1: {
            const auto s = order1_sums(q, 1);
            return 1 / x + std::log(half) * half * s.regular - half / 2 * s.digamma;
        }
    }
    return 0;
}

double asymptotic(BesselKind kind, double x) {
    const int order = order_of(kind);
    const HankelSums h = hankel_sums(order, x);
    if (is_standard(kind)) {
        const long double p = h.even_alternating;
        const long double qq = h.odd_alternating;
        const long double c = std::cos(static_cast<long double>(x));
        const long double s = std::sin(static_cast<long double>(x));
        const long double pre = 1 / std::sqrt(kPiL * x);
        switch (kind) {
            case BesselKind::J0: return static_cast<double>(pre * (p * (c + s) - qq * (s - c)));
            case BesselKind::Y0: return static_cast<double>(pre * (p * (s - c) + qq * (c + s)));
            case BesselKind::J1: return static_cast<double>(pre * (p * (s - c) + qq * (s + c)));
            default: return static_cast<double>(pre * (-p * (s + c) + qq * (s - c)));
        }
    }
    if (kind == BesselKind::I0 || kind == BesselKind::I1) {
        const double scale = std::exp(x - 0.5 * std::log(2 * kPi * x));
        if (!std::isfinite(scale))
            throw std::overflow_error(std::string(name(kind)) + " overflows at x = " +
                                      std::to_string(x));
        return scale * static_cast<double>(h.alternating);
    }
    return std::sqrt(kPi / (2 * x)) * std::exp(-x) * static_cast<double>(h.plain);
}

double k_integral(int order, double x) {
    // K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; trapezoid on an
    // analytic, doubly-exponentially decaying integrand.
    constexpr double step = 0.1;
    auto f = [&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(order * t); };
    double sum = 0.5 * f(0.0);
    for (int j = 1; j < 10000; ++j) {
        const double term = f(j * step);
        sum += term;
        if (term < 1e-19 * sum) break;
    }
    return step * sum;
}

}  // namespace detail

double eval(BesselKind kind, double x) {
    if (!(x >= 0))
        throw DomainError(std::string(name(kind)) + " needs x >= 0, got " + std::to_string(x));
    if (x == 0) {
        switch (kind) {
            case BesselKind::J0:
            case BesselKind::I0:
                return 1;
            case BesselKind::J1:
            case BesselKind::I1:
                return 0;
            default:
                throw DomainError(std::string(name(kind)) + " is singular at x = 0");
        }
    }
    const bool k_kind = kind == BesselKind::K0 || kind == BesselKind::K1;
    if (x > asymptotic_crossover) return detail::asymptotic(kind, x);
    if (k_kind && x > k_series_limit) return detail::k_integral(order_of(kind), x);
    return static_cast<double>(detail::series(kind, x));
}

double wronskian_standard(double x) {
    if (!(x > 0)) throw DomainError("standard Wronskian needs x > 0");
    return j1(x) * y0(x) - y1(x) * j0(x);
}

double wronskian_modified(double x) {
    if (!(x > 0)) throw DomainError("modified Wronskian needs x > 0");
    return k1(x) * i0(x) + i1(x) * k0(x);
}

}  // namespace evla::specfn
