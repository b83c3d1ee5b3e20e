#pragma once

// Steady-form fluence rate in the moving source frame s = z + vt.
//
//   column   : B0 e^{-mu_eff s} - P_in e^{-mu_t s}
//   annulus  : B0 e^{-mu_eff s} + (B1 J0(b_b r) + B2 Y0(b_b r)) e^{-mu_t s}
//   region j : (B3 W3(k_j r) + B4 W4(k_j r)) e^{-mu_eff s}
//              + (B5 J0(b_j r) + B6 Y0(b_j r)) e^{-mu_t s}
//
// mu_eff, mu_t without a region tag are blood values. Behind the tip
// (s < 0) the field is the even extension in s.

#include <array>
#include <string>
#include <vector>

#include "evla/params.hpp"

namespace evla {

struct SourceTerm {
    double S0 = 0;          // W/mm^3
    double mu_t_blood = 0;  // 1/mm
    double v = 0;           // mm/s
    double r_f = 0;         // mm

    /// S0 exp(-mu_t (z + v t)) inside the fibre column, 0 outside.
    double eval(double r, double z, double t) const;
};

SourceTerm build_source(const Protocol& protocol, const Geometry& geo,
                        const RegionOptics& blood_optics);

enum class WKind { Modified, Standard };
const char* name(WKind k);

/// Index 0..2 = wall, pad, skin.
struct BranchFactors {
    std::array<double, 3> kappa{};
    std::array<WKind, 3> w_kind{};
    double beta_blood = 0;
    std::array<double, 3> beta{};
};

BranchFactors branch_factors(const ParameterSet& p);

enum class Family { MuEff, MuT };

struct CoefficientRow {
    std::string family;
    std::string region;
    std::string name;
    double value;
};

class FluenceSolution {
public:
    ParameterSet params;
    SourceTerm src;
    BranchFactors branch;
    std::array<DerivedOptics, 4> optics{};

    double P_in = 0;  // S0 / (D mu_t^2 - mu_a), blood
    double B0 = 0;
    double B1 = 0, B2 = 0;
    std::array<double, 3> B3{}, B4{}, B5{}, B6{};
    double rcond_mu_eff = 0;
    double rcond_mu_t = 0;

    double mu_eff() const { return optics[0].mu_eff; }
    double mu_t() const { return optics[0].mu_t; }
    double v() const { return params.protocol.v; }

    /// Radial factor of one exponential family. No domain checks beyond region_of.
    double radial(Family f, double r) const;
    double radial_derivative(Family f, double r) const;
    /// int_a^b r R_f(r) dr, split at interfaces as needed.
    double radial_moment(Family f, double a, double b) const;

    /// Field at radius r and source-frame coordinate s (mirrored for s < 0).
    double at(double r, double s) const;
    /// D_j dphi/dr evaluated with the material on the given side of r.
    double flux(double r, double s, Material side) const;
    double value_on_side(double r, double s, Material side) const;

    std::vector<CoefficientRow> coefficients() const;
};

/// Solves both interface systems. Throws SingularSystem if a system is
/// numerically singular or the solved field misses continuity by > 1e-9.
FluenceSolution assemble_and_solve(const ParameterSet& p);

/// Throws DomainError outside r in [0, r_s], z in [-L, L], t in [0, t_end].
double eval_fluence(const FluenceSolution& sol, double r, double z, double t);

/// nu (D mu_t^2 - mu_a) for blood, 1/s.
double transient_rate(const DerivedOptics& blood, const RegionOptics& blood_optics);

/// Column-only transient fluence; t in seconds. Overflows to +inf within
/// nanoseconds for table inputs. Throws DomainError for r >= r_f.
double eval_fluence_transient(const Protocol& protocol, const Geometry& geo,
                              const RegionOptics& blood_optics, double r, double z, double t);

struct ContinuityReport {
    double value_jump = 0;  // max relative, over r_f, r_i, r_w, r_p
    double flux_jump = 0;   // max relative, over r_i, r_w, r_p
};

/// Interface jumps sampled at n z-points across [-L, L] at time t.
ContinuityReport continuity_residuals(const FluenceSolution& sol, int nz = 100, double t = 0);

}  // namespace evla
