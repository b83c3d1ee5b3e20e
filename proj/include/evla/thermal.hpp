#pragma once

// Temperature field T = T_b + particular + offset + modal correction.
//
// The particular part is a sum of separable terms
//     c * R_f(r) * exp(-mu_f z) * (exp(rate t) - exp(-mu_f v t)),
// one per region and fluence family. The offset is the steady response to the
// ambient temperature at the skin; the modal part cancels it at t = 0.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "evla/fluence.hpp"

namespace evla {

/// Coefficients of generic PDE  alpha u_t + b u_z - a Lap u + B u = f.
struct GenericPDEParams {
    double alpha = 0;  // rho c_p
    double a = 0;      // k
    double b = 0;      // rho_b c_b u in the lumen
    double B = 0;      // c_b omega outside the lumen
};

GenericPDEParams pde_params(const ParameterSet& p, Material m);

struct ParticularTerm {
    double amplitude = 0;  // multiplies R_f(r)
    double rate = 0;       // 1/s
    double mu = 0;         // 1/mm
    // true: amplitude multiplies duhamel_kernel(rate, mu v, t); false: the bare
    // difference exp(rate t) - exp(-mu v t).
    bool normalized = true;
};

/// Region order: FiberColumn, BloodAnnulus, Wall, Pad, Skin. Family order: mu_eff, mu_t.
struct ParticularTerms {
    double zeta1 = 0, zeta2 = 0, zeta3 = 0;
    std::array<double, 3> outer_rate{};
    std::array<std::array<ParticularTerm, 2>, 5> terms{};
    ParticularReading reading = ParticularReading::PrintedLinearRate;
    double v = 0;
};

/// Throws DegenerateDenominator when a printed denominator vanishes.
ParticularTerms particular_terms(const FluenceSolution& fl, const ParameterSet& p,
                                 ParticularReading reading);

/// exp(-mu z) (exp(rate t) - exp(-mu v t)), evaluated without cancellation.
double particular_kernel(double rate, double mu, double v, double z, double t);
/// (exp(rate t) - exp(-d t)) / (rate + d) with its limit t exp(rate t) at rate = -d.
double duhamel_kernel(double rate, double d, double t);

enum class RadialKind { Standard, Modified };

struct Mode {
    int m = 0;
    double eta = 0;   // 1/mm
    double zeta = 0;  // 1/s, < 0
    std::array<double, 3> beta1_sq{};        // wall, pad, skin; 1/mm^2
    std::array<RadialKind, 3> kind{};
    // Unit-slope shape at r_i: wall combination scale, then pad and skin pairs.
    double A1w = 0, A1p = 0, A2p = 0, A1s = 0, A2s = 0;
    double weight = 0;  // projection amplitude, degC

    double shape(double r, const Geometry& g) const;
    double shape_derivative(double r, const Geometry& g) const;
};

struct ModalContext {
    Geometry geo;
    std::array<RegionThermal, 3> tissue{};  // wall, pad, skin
    double c_b = 0;
    double h_air = 0;
};

ModalContext modal_context(const ParameterSet& p);

/// Robin residual k R'(r_s) + h R(r_s) of the unit-slope radial solution at rate zeta.
double modal_transfer(const ModalContext& ctx, double eta, double zeta);

/// First n_roots decaying modes with -zeta in [0, zeta_max]. Throws BracketExhausted.
std::vector<Mode> modal_eigenvalues(const ModalContext& ctx, int m, double zeta_max, int n_roots);

/// Widens the bracket until n_roots are found.
std::vector<Mode> modal_eigenvalues(const ModalContext& ctx, int m, int n_roots);

struct OffsetRegion {
    double q = 0;  // sqrt(B / a), 1/mm
    double A1 = 0, A2 = 0;
};

/// Steady perfused-tissue response to T_air != T_b, clamped at r_i.
struct SteadyOffset {
    std::array<OffsetRegion, 3> region{};
    Geometry geo;
    double eval(double r) const;
    double derivative(double r) const;
};

SteadyOffset steady_robin_offset(const ParameterSet& p);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Composite Simpson with `per_region` intervals on each of wall, pad, skin.
QuadratureRule projection_rule(const Geometry& g, int per_region = 512);

/// Sets each mode's weight to the least-squares fit (weight rho c_p r) of
/// `target` on [r_i, r_s]. Throws RankDeficient.
void project_initial(std::vector<Mode>& modes, const ModalContext& ctx,
                     const std::function<double(double)>& target, int per_region = 512);

struct TemperatureSolution {
    ParameterSet params;
    FluenceSolution fluence;
    ParticularTerms particular;
    SteadyOffset offset;
    std::vector<Mode> modes;
    std::vector<std::string> warnings;

    double particular_part(double r, double z, double t) const;
    double modal_part(double r, double z, double t) const;
};

TemperatureSolution build_temperature(const ParameterSet& p);
TemperatureSolution build_temperature(const ParameterSet& p, const FluenceSolution& fl);

/// Throws DomainError outside the space-time domain. May return +inf where the
/// printed growth rates overflow.
double eval_temperature(const TemperatureSolution& sol, double r, double z, double t);

/// Axial profile exp(bz/2a) (b sinh(X(L-z)) + S cosh(X(L-z))), S = sqrt(b^2+4a^2 eta^2), X = S/2a.
double eval_Z_general(double b, double a, double eta, double L, double z);

}  // namespace evla
