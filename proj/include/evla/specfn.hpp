#pragma once

// Bessel functions of orders 0 and 1 for real non-negative arguments.
//
// Small arguments use the origin power series (summed in extended
// precision), large arguments the Hankel asymptotic expansions. K0/K1 in
// the intermediate range are computed from their cosh integral
// representation, where the origin series loses accuracy to cancellation.

namespace evla::specfn {

enum class BesselKind { J0, J1, Y0, Y1, I0, I1, K0, K1 };

const char* name(BesselKind kind);

/// Arguments above this use the asymptotic expansions.
inline constexpr double asymptotic_crossover = 17.0;
/// K0/K1 switch from the origin series to the integral representation here.
inline constexpr double k_series_limit = 2.0;

/// Throws DomainError for x < 0, or x == 0 with Y/K kinds;
/// std::overflow_error when I0/I1 exceed the double range.
double eval(BesselKind kind, double x);

inline double j0(double x) { return eval(BesselKind::J0, x); }
inline double j1(double x) { return eval(BesselKind::J1, x); }
inline double y0(double x) { return eval(BesselKind::Y0, x); }
inline double y1(double x) { return eval(BesselKind::Y1, x); }
inline double i0(double x) { return eval(BesselKind::I0, x); }
inline double i1(double x) { return eval(BesselKind::I1, x); }
inline double k0(double x) { return eval(BesselKind::K0, x); }
inline double k1(double x) { return eval(BesselKind::K1, x); }

/// J1(x)Y0(x) - Y1(x)J0(x), which equals 2/(pi x).
double wronskian_standard(double x);
/// K1(x)I0(x) + I1(x)K0(x), which equals 1/x.
double wronskian_modified(double x);

namespace detail {
// Individual evaluation routes, exposed for overlap/continuity tests.
long double series(BesselKind kind, long double x);
double asymptotic(BesselKind kind, double x);
double k_integral(int order, double x);
}  // namespace detail

}  // namespace evla::specfn
