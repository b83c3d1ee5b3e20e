#include "evla/fdoracle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>

#include "evla/errors.hpp"

namespace evla {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

std::array<double, 6> zone_edges(const Geometry& g) {
    return {0.0, g.r_f, g.r_i, g.r_w(), g.r_p, g.r_s};
}

// Radial control volume of node i split at the node: [face_lo, r_i] and
// [r_i, face_hi], each inside one material.
struct HalfCell {
    double lo, hi;
    Material material;
    double area() const { return 0.5 * (hi * hi - lo * lo); }
};

struct RadialCells {
    std::vector<double> face;                 // nr + 1 entries
    std::vector<std::array<HalfCell, 2>> half;  // left, right
    std::vector<Material> segment;            // material between r[i], r[i+1]
};

RadialCells radial_cells(const Grid2D& g, const Geometry& geo) {
    RadialCells c;
    const int nr = g.nr();
    c.face.resize(nr + 1);
    c.face[0] = 0;
    for (int i = 1; i < nr; ++i) c.face[i] = 0.5 * (g.r[i - 1] + g.r[i]);
    c.face[nr] = g.r[nr - 1];
    c.segment.resize(nr - 1);
    for (int i = 0; i + 1 < nr; ++i)
        c.segment[i] = material_of(region_of(0.5 * (g.r[i] + g.r[i + 1]), geo));
    c.half.resize(nr);
    for (int i = 0; i < nr; ++i) {
        const Material left = i > 0 ? c.segment[i - 1] : c.segment[0];
        const Material right = i + 1 < nr ? c.segment[i] : c.segment[nr - 2];
        c.half[i] = {HalfCell{c.face[i], g.r[i], left}, HalfCell{g.r[i], c.face[i + 1], right}};
    }
    return c;
}

std::vector<double> z_faces(const Grid2D& g) {
    const int nz = g.nz();
    std::vector<double> f(nz + 1);
    f[0] = g.z[0];
    for (int j = 1; j < nz; ++j) f[j] = 0.5 * (g.z[j - 1] + g.z[j]);
    f[nz] = g.z[nz - 1];
    return f;
}

// int_a^b exp(-mu |s + shift|) ds
double mirrored_exp_integral(double mu, double a, double b) {
    auto prim = [mu](double s) {
        // Odd antiderivative of exp(-mu |s|).
        return s >= 0 ? -std::expm1(-mu * s) / mu : std::expm1(mu * s) / mu;
    };
    return prim(b) - prim(a);
}

template <class Solver>
Eigen::VectorXd run_solver(Solver& solver, const SpMat& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& guess, double tol, int max_it,
                           const char* what) {
    solver.setTolerance(tol);
    solver.setMaxIterations(max_it);
    solver.compute(A);
    Eigen::VectorXd x = solver.solveWithGuess(b, guess);
    if (solver.info() != Eigen::Success) throw NonConvergence(what, solver.iterations(), solver.error());
    return x;
}

}  // namespace

Grid2D make_grid(const Geometry& g, const std::array<int, 5>& per_region, int nz, double z0,
                 double z1) {
    if (nz < 2 || !(z1 > z0)) throw DomainError("grid needs nz >= 2 and z1 > z0");
    Grid2D grid;
    const auto edges = zone_edges(g);
    for (int k = 0; k < 5; ++k) {
        const int n = per_region[k];
        if (n < 1) throw DomainError("every radial zone needs at least one interval");
        for (int i = 0; i < n; ++i) grid.r.push_back(edges[k] + (edges[k + 1] - edges[k]) * i / n);
    }
    grid.r.push_back(g.r_s);
    grid.z.resize(nz);
    for (int j = 0; j < nz; ++j) grid.z[j] = z0 + (z1 - z0) * j / (nz - 1);
    grid.z.back() = z1;
    return grid;
}

Grid2D make_grid(const Geometry& g, int nr, int nz, double z0, double z1) {
    const auto edges = zone_edges(g);
    std::array<int, 5> counts{};
    for (int k = 0; k < 5; ++k)
        counts[k] = std::max(2, static_cast<int>(std::lround(nr * (edges[k + 1] - edges[k]) / g.r_s)));
    return make_grid(g, counts, nz, z0, z1);
}

CellIntegral fibre_source(const FluenceSolution& sol, double t) {
    const SourceTerm src = sol.src;
    return [src, t](double r0, double r1, double z0, double z1) {
        const double hi = std::min(r1, src.r_f);
        if (!(hi > r0)) return 0.0;
        const double area = 0.5 * (hi * hi - r0 * r0);
        const double mu = src.mu_t_blood;
        const double s0 = z0 + src.v * t, s1 = z1 + src.v * t;
        // int exp(-mu s) ds = e^{-mu s0} (1 - e^{-mu (s1 - s0)}) / mu
        return src.S0 * area * std::exp(-mu * s0) * -std::expm1(-mu * (s1 - s0)) / mu;
    };
}

FDField solve_fluence_fd(const Grid2D& grid, const ParameterSet& p, const CellIntegral& source,
                         const FluenceFDOptions& opt) {
    const int nr = grid.nr(), nz = grid.nz();
    if (nr < 16 || nz < 16) throw DomainError("fluence grid needs nr, nz >= 16");
    const RadialCells rc = radial_cells(grid, p.geo);
    const std::vector<double> zf = z_faces(grid);
    std::array<double, 4> D{}, mu_a{};
    for (Material m : kMaterials) {
        D[index(m)] = p.derived(m).D;
        mu_a[index(m)] = p.optics_of(m).mu_a;
    }

    const int N = nr * nz;
    std::vector<char> fixed(N, 0);
    std::vector<double> fixed_value(N, 0.0);
    const bool outer_fixed = opt.outer_dirichlet || opt.closure == OuterClosure::ZeroValue;
    for (int j = 0; j < nz; ++j) {
        for (int i = 0; i < nr; ++i) {
            const int p_ = grid.index(i, j);
            if (i == nr - 1 && outer_fixed) {
                fixed[p_] = 1;
                fixed_value[p_] = opt.outer_dirichlet ? opt.outer_dirichlet(grid.r[i], grid.z[j]) : 0.0;
            }
            if ((j == 0 || j == nz - 1) && opt.z_dirichlet) {
                fixed[p_] = 1;
                fixed_value[p_] = opt.z_dirichlet(grid.r[i], grid.z[j]);
            }
        }
    }
    std::vector<int> unknown(N, -1);
    int n_unknown = 0;
    for (int k = 0; k < N; ++k)
        if (!fixed[k]) unknown[k] = n_unknown++;

    std::vector<double> Dz(nr, 0.0), reaction(nr, 0.0);
    for (int i = 0; i < nr; ++i)
        for (const HalfCell& h : rc.half[i]) {
            Dz[i] += D[index(h.material)] * h.area();
            reaction[i] += mu_a[index(h.material)] * h.area();
        }

    std::vector<Triplet> trip;
    trip.reserve(5 * static_cast<size_t>(n_unknown));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);
    for (int j = 0; j < nz; ++j) {
        const double vz = zf[j + 1] - zf[j];
        for (int i = 0; i < nr; ++i) {
            const int k = grid.index(i, j);
            const int row = unknown[k];
            if (row < 0) continue;
            double diag = reaction[i] * vz;
            rhs(row) += source(rc.face[i], rc.face[i + 1], zf[j], zf[j + 1]);
            auto couple = [&](int nb, double c) {
                diag += c;
                if (unknown[nb] >= 0)
                    trip.emplace_back(row, unknown[nb], -c);
                else
                    rhs(row) += c * fixed_value[nb];
            };
            if (i + 1 < nr)
                couple(grid.index(i + 1, j),
                       D[index(rc.segment[i])] * rc.face[i + 1] / (grid.r[i + 1] - grid.r[i]) * vz);
            if (i > 0)
                couple(grid.index(i - 1, j),
                       D[index(rc.segment[i - 1])] * rc.face[i] / (grid.r[i] - grid.r[i - 1]) * vz);
            if (j + 1 < nz) couple(grid.index(i, j + 1), Dz[i] / (grid.z[j + 1] - grid.z[j]));
            if (j > 0) couple(grid.index(i, j - 1), Dz[i] / (grid.z[j] - grid.z[j - 1]));
            trip.emplace_back(row, row, diag);
        }
    }
    SpMat A(n_unknown, n_unknown);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    const Eigen::VectorXd x = run_solver(cg, A, rhs, Eigen::VectorXd::Zero(n_unknown), opt.tolerance,
                                         opt.max_iterations, "fluence FD solve did not converge");

    FDField out;
    out.grid = grid;
    out.quantity = Quantity::Fluence;
    out.values.resize(N);
    for (int k = 0; k < N; ++k) out.values[k] = fixed[k] ? fixed_value[k] : x(unknown[k]);
    return out;
}

AbsorbedPower::AbsorbedPower(const FluenceSolution& sol, const Grid2D& grid)
    : sol_(&sol), grid_(grid) {
    const RadialCells rc = radial_cells(grid, sol.params.geo);
    const int nr = grid.nr();
    moment_eff_.assign(nr, 0.0);
    moment_t_.assign(nr, 0.0);
    for (int i = 0; i < nr; ++i)
        for (const HalfCell& h : rc.half[i]) {
            if (!(h.hi > h.lo)) continue;
            const double mu_a = sol.params.optics_of(h.material).mu_a;
            moment_eff_[i] += mu_a * sol.radial_moment(Family::MuEff, h.lo, h.hi);
            moment_t_[i] += mu_a * sol.radial_moment(Family::MuT, h.lo, h.hi);
        }
    const std::vector<double> zf = z_faces(grid);
    z_lo_.assign(zf.begin(), zf.end() - 1);
    z_hi_.assign(zf.begin() + 1, zf.end());
}

void AbsorbedPower::evaluate(double t, std::vector<double>& out) const {
    const int nr = grid_.nr(), nz = grid_.nz();
    out.assign(static_cast<size_t>(nr) * nz, 0.0);
    const double shift = sol_->v() * t;
    for (int j = 0; j < nz; ++j) {
        const double ze = mirrored_exp_integral(sol_->mu_eff(), z_lo_[j] + shift, z_hi_[j] + shift);
        const double zt = mirrored_exp_integral(sol_->mu_t(), z_lo_[j] + shift, z_hi_[j] + shift);
        for (int i = 0; i < nr; ++i) out[grid_.index(i, j)] = moment_eff_[i] * ze + moment_t_[i] * zt;
    }
}

std::vector<double> cell_heat_capacity(const Grid2D& grid, const ParameterSet& p) {
    const RadialCells rc = radial_cells(grid, p.geo);
    const std::vector<double> zf = z_faces(grid);
    std::vector<double> C(static_cast<size_t>(grid.nr()) * grid.nz(), 0.0);
    for (int j = 0; j < grid.nz(); ++j)
        for (int i = 0; i < grid.nr(); ++i) {
            double c = 0;
            for (const HalfCell& h : rc.half[i]) c += p.thermal_of(h.material).heat_capacity() * h.area();
            C[grid.index(i, j)] = c * (zf[j + 1] - zf[j]);
        }
    return C;
}

double heat_content(const FDField& field, const ParameterSet& p) {
    const std::vector<double> C = cell_heat_capacity(field.grid, p);
    double total = 0;
    for (size_t k = 0; k < C.size(); ++k) total += C[k] * field.values[k];
    return total;
}

std::vector<FDField> solve_heat_fd(const Grid2D& grid, const ParameterSet& p, const HeatSource& q,
                                   const HeatFDOptions& opt) {
    const int nr = grid.nr(), nz = grid.nz();
    if (nr < 16 || nz < 16) throw DomainError("heat grid needs nr, nz >= 16");
    if (!(opt.dt > 0)) throw DomainError("heat FD needs dt > 0");
    const RadialCells rc = radial_cells(grid, p.geo);
    const std::vector<double> zf = z_faces(grid);
    const int N = nr * nz;
    const double T_b = p.protocol.T_b;
    const double rho_c_b = p.rho_b() * p.c_b();
    const double u = p.protocol.u;

    std::vector<double> kz(nr, 0.0), perf(nr, 0.0), conv(nr, 0.0);
    for (int i = 0; i < nr; ++i)
        for (const HalfCell& h : rc.half[i]) {
            const RegionThermal& t = p.thermal_of(h.material);
            kz[i] += t.k * h.area();
            if (opt.perfusion) perf[i] += p.c_b() * t.omega * h.area();
            if (h.material == Material::Blood) conv[i] += rho_c_b * u * h.area();
        }
    const std::vector<double> C = cell_heat_capacity(grid, p);

    std::vector<Triplet> trip;
    trip.reserve(6 * static_cast<size_t>(N));
    Eigen::VectorXd steady = Eigen::VectorXd::Zero(N);  // time-independent right-hand side
    Eigen::VectorXd cap(N);
    for (int j = 0; j < nz; ++j) {
        const double vz = zf[j + 1] - zf[j];
        for (int i = 0; i < nr; ++i) {
            const int k = grid.index(i, j);
            cap(k) = C[k] / opt.dt;
            double diag = cap(k) + perf[i] * vz;
            steady(k) += perf[i] * vz * T_b;
            auto couple = [&](int nb, double c) {
                diag += c;
                trip.emplace_back(k, nb, -c);
            };
            if (i + 1 < nr)
                couple(grid.index(i + 1, j), p.thermal_of(rc.segment[i]).k * rc.face[i + 1] /
                                                 (grid.r[i + 1] - grid.r[i]) * vz);
            if (i > 0)
                couple(grid.index(i - 1, j), p.thermal_of(rc.segment[i - 1]).k * rc.face[i] /
                                                 (grid.r[i] - grid.r[i - 1]) * vz);
            if (j + 1 < nz) couple(grid.index(i, j + 1), kz[i] / (grid.z[j + 1] - grid.z[j]));
            if (j > 0) couple(grid.index(i, j - 1), kz[i] / (grid.z[j] - grid.z[j - 1]));
            if (i == nr - 1 && opt.robin) {
                const double hr = p.protocol.h_air * grid.r[i] * vz;
                diag += hr;
                steady(k) += hr * p.protocol.T_air;
            }
            if (conv[i] > 0) {
                // Upwind in +z; blood enters at T_b.
                diag += conv[i];
                if (j > 0)
                    trip.emplace_back(k, grid.index(i, j - 1), -conv[i]);
                else
                    steady(k) += conv[i] * T_b;
            }
            trip.emplace_back(k, k, diag);
        }
    }
    SpMat A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> bicg;
    const bool symmetric = u == 0;
    auto configure = [&](auto& s) {
        s.setTolerance(opt.tolerance);
        s.setMaxIterations(opt.max_iterations);
        s.compute(A);
    };
    if (symmetric)
        configure(cg);
    else
        configure(bicg);

    Eigen::VectorXd T = Eigen::VectorXd::Constant(N, T_b);
    std::vector<double> qv(N, 0.0);
    std::vector<FDField> history;
    auto record = [&](double t) {
        FDField f;
        f.grid = grid;
        f.quantity = Quantity::Temperature;
        f.time = t;
        f.values.assign(T.data(), T.data() + N);
        history.push_back(std::move(f));
    };
    std::vector<double> pending = opt.record_times;
    std::sort(pending.begin(), pending.end());
    size_t next = 0;
    auto maybe_record = [&](double t) {
        while (next < pending.size() && pending[next] <= t + 0.5 * opt.dt) {
            if (pending[next] >= t - 0.5 * opt.dt) record(t);
            ++next;
        }
    };
    maybe_record(0.0);
    const int steps = static_cast<int>(std::lround(opt.t_end / opt.dt));
    for (int n = 1; n <= steps; ++n) {
        const double t = n * opt.dt;
        Eigen::VectorXd rhs = steady + cap.cwiseProduct(T);
        if (q) {
            q(t, qv);
            rhs += Eigen::Map<const Eigen::VectorXd>(qv.data(), N);
        }
        if (symmetric) {
            T = cg.solveWithGuess(rhs, T);
            if (cg.info() != Eigen::Success)
                throw NonConvergence("heat FD step " + std::to_string(n), cg.iterations(), cg.error());
        } else {
            T = bicg.solveWithGuess(rhs, T);
            if (bicg.info() != Eigen::Success)
                throw NonConvergence("heat FD step " + std::to_string(n), bicg.iterations(),
                                     bicg.error());
        }
        maybe_record(t);
    }
    return history;
}

std::vector<RegionResidual> residual_probe(const ProbeOperator& op, const ProbeSamples& samples,
                                           double h, double time_scale) {
    auto residual = [&](double r, double z, double t, double step) {
        const auto& F = op.field;
        const double c = F(r, z, t);
        const double frr = (F(r + step, z, t) - 2 * c + F(r - step, z, t)) / (step * step);
        const double fr = (F(r + step, z, t) - F(r - step, z, t)) / (2 * step);
        const double fzz = (F(r, z + step, t) - 2 * c + F(r, z - step, t)) / (step * step);
        double res = -op.a(r) * (frr + fr / r + fzz);
        if (op.alpha) {
            const double al = op.alpha(r);
            if (al != 0) {
                const double ht = step * time_scale;
                res += al * (F(r, z, t + ht) - F(r, z, t - ht)) / (2 * ht);
            }
        }
        if (op.B) res += op.B(r) * c;
        if (op.forcing) res -= op.forcing(r, z, t);
        return res;
    };
    std::vector<RegionResidual> out;
    for (size_t k = 0; k < samples.points.size(); ++k) {
        RegionResidual rr;
        rr.region = samples.region[k];
        double s2c = 0, s2f = 0;
        for (const auto& [r, z] : samples.points[k]) {
            const double rc = residual(r, z, samples.t, h);
            const double rf = residual(r, z, samples.t, h / 2);
            rr.max_coarse = std::max(rr.max_coarse, std::fabs(rc));
            rr.max_fine = std::max(rr.max_fine, std::fabs(rf));
            s2c += rc * rc;
            s2f += rf * rf;
        }
        const double n = static_cast<double>(samples.points[k].size());
        rr.l2_coarse = std::sqrt(s2c / n);
        rr.l2_fine = std::sqrt(s2f / n);
        rr.order = std::log2(rr.l2_coarse / rr.l2_fine);
        out.push_back(rr);
    }
    return out;
}

ProbeSamples interior_samples(const Geometry& g, double z0, double z1, double margin, int per_axis,
                              double t) {
    ProbeSamples s;
    s.t = t;
    const auto edges = zone_edges(g);
    for (int k = 0; k < 5; ++k) {
        const double lo = edges[k] + margin, hi = edges[k + 1] - margin;
        if (!(hi > lo)) continue;
        s.region.push_back(name(kRegions[k]));
        std::vector<std::array<double, 2>> pts;
        for (int a = 0; a < per_axis; ++a)
            for (int b = 0; b < per_axis; ++b) {
                const double fr = per_axis == 1 ? 0.5 : static_cast<double>(a) / (per_axis - 1);
                const double fz = per_axis == 1 ? 0.5 : static_cast<double>(b) / (per_axis - 1);
                pts.push_back({lo + (hi - lo) * fr, z0 + margin + (z1 - z0 - 2 * margin) * fz});
            }
        s.points.push_back(std::move(pts));
    }
    return s;
}

}  // namespace evla
