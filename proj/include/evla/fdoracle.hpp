#pragma once

// Axisymmetric finite-volume reference solvers on node-centred grids whose
// radial lines include every material interface.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evla/fluence.hpp"
#include "evla/params.hpp"

namespace evla {

struct Grid2D {
    std::vector<double> r;  // ascending, r[0] = 0, r.back() = r_s
    std::vector<double> z;  // ascending
    int nr() const { return static_cast<int>(r.size()); }
    int nz() const { return static_cast<int>(z.size()); }
    int index(int i, int j) const { return j * nr() + i; }
};

/// Interval counts per radial zone (column, annulus, wall, pad, skin).
Grid2D make_grid(const Geometry& g, const std::array<int, 5>& per_region, int nz, double z0,
                 double z1);
/// Distributes about nr intervals in proportion to zone width, at least 2 per zone.
Grid2D make_grid(const Geometry& g, int nr, int nz, double z0, double z1);

enum class Quantity { Fluence, Temperature };

struct FDField {
    Grid2D grid;
    std::vector<double> values;  // index(i, j)
    Quantity quantity = Quantity::Fluence;
    double time = 0;
    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

/// int over a control volume [r0,r1] x [z0,z1] of f r dr dz.
using CellIntegral = std::function<double(double r0, double r1, double z0, double z1)>;
using BoundaryValue = std::function<double(double r, double z)>;

struct FluenceFDOptions {
    OuterClosure closure = OuterClosure::ZeroValue;
    BoundaryValue outer_dirichlet;  // overrides closure at r_s when set
    BoundaryValue z_dirichlet;      // Dirichlet at both z ends when set, else zero flux
    double tolerance = 1e-10;
    int max_iterations = 20000;
};

/// -div(D grad phi) + mu_a phi = S on the grid.
FDField solve_fluence_fd(const Grid2D& grid, const ParameterSet& p, const CellIntegral& source,
                         const FluenceFDOptions& opt = {});

/// Exact cell integrals of the fibre source at time t.
CellIntegral fibre_source(const FluenceSolution& sol, double t);

/// Cell integrals of mu_a phi at time t, exact in r and z.
class AbsorbedPower {
public:
    AbsorbedPower(const FluenceSolution& sol, const Grid2D& grid);
    /// Per-node integrals over the node's control volume.
    void evaluate(double t, std::vector<double>& out) const;

private:
    const FluenceSolution* sol_;
    Grid2D grid_;
    std::vector<double> moment_eff_, moment_t_;  // mu_a-weighted radial moments
    std::vector<double> z_lo_, z_hi_;
};

struct HeatFDOptions {
    double dt = 0.02;
    double t_end = 10;
    std::vector<double> record_times;  // snapshots returned, nearest step
    bool robin = true;                 // else zero flux at r_s
    bool perfusion = true;
    double tolerance = 1e-10;
    int max_iterations = 20000;
};

using HeatSource = std::function<void(double t, std::vector<double>& cell_integrals)>;

/// Implicit Euler for rho c T_t + rho_b c_b u T_z = div(k grad T) - c_b omega (T - T_b) + q.
/// Upwinded convection in the lumen; Robin (h_air, T_air) at r_s; zero flux in z.
std::vector<FDField> solve_heat_fd(const Grid2D& grid, const ParameterSet& p,
                                   const HeatSource& q, const HeatFDOptions& opt);

/// Total heat content sum(rho c T r dr dz) of a temperature field, per radian.
double heat_content(const FDField& field, const ParameterSet& p);

/// Per-node control-volume heat capacity int rho c r dr dz (J/degC per radian).
std::vector<double> cell_heat_capacity(const Grid2D& grid, const ParameterSet& p);

// ---- residual probes ----------------------------------------------------

/// alpha F_t - a Lap F + B F - f, by centred differences.
struct ProbeOperator {
    std::function<double(double r, double z, double t)> field;
    std::function<double(double r, double z, double t)> forcing;  // may be empty
    std::function<double(double r)> alpha, a, B;
};

struct RegionResidual {
    std::string region;
    double max_coarse = 0, l2_coarse = 0;
    double max_fine = 0, l2_fine = 0;
    double order = 0;  // log2(l2_coarse / l2_fine)
};

struct ProbeSamples {
    std::vector<std::string> region;
    std::vector<std::vector<std::array<double, 2>>> points;  // per region (r, z)
    double t = 0;
};

/// Residual at step h and h/2 (time step h * time_scale).
std::vector<RegionResidual> residual_probe(const ProbeOperator& op, const ProbeSamples& samples,
                                           double h, double time_scale = 1.0);

/// Interior sample lattice for each zone, at least `margin` away from its edges.
ProbeSamples interior_samples(const Geometry& g, double z0, double z1, double margin, int per_axis,
                              double t = 0);

}  // namespace evla
