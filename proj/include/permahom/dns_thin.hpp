#pragma once

#include <vector>

#include "permahom/darcy2d.hpp"
#include "permahom/geometry.hpp"
#include "permahom/stokes.hpp"

namespace permahom {

/// Direct Stokes solution on the thin perforated box Q_eps with no-slip on
/// the outer boundary and on every obstacle. The dilated norms carry the
/// 1/eps vertical weighting used by the a priori estimates.
struct DnsSolution {
    ThinDomainSpec spec;
    int n_c = 0;
    double nu = 1.0;
    double porosity = 1.0;
    StaggeredGrid grid;
    std::vector<std::uint8_t> cell_fluid;
    FaceField u;
    Array3 p;
    double mom_residual = 0;
    double div_residual = 0;
    int outer_iters = 0;
    long long inner_iters = 0;
    double norm_u_dilated = 0;   // || u~ ||_L2 on the unit-height domain
    double norm_Du_dilated = 0;  // || D_eps u~ ||_L2 (= physical gradient norm / sqrt(eps))
};

/// Solve the Stokes system on the perforated mask with body force
/// (f'(x'), 0). The default mode is the closed no-slip box of the thin
/// porous medium; BoundaryMode::channel (horizontally periodic plates)
/// exists for obstacle-free flow oracles, where a closed box would absorb
/// any conservative force into the pressure. Throws GridTooLarge when the
/// unknown count exceeds the cap (unless overridden), NotConverged on cap
/// exhaustion.
DnsSolution solve_dns(const PerforatedMask3D& mask, const ForceSpec& force,
                      const SolverConfig& cfg, long long unknown_cap = 10'000'000,
                      bool override_cap = false,
                      BoundaryMode mode = BoundaryMode::no_slip_walls);

/// Column averages of the zero-extended velocity: per a_eps-column mean of
/// each component over the column volume, plus the a_eps^{-2}-scaled
/// horizontal components and L2(omega) aggregates.
struct AveragedVelocity {
    int mx = 0, my = 0;
    double a_eps = 0;
    Array2 u1, u2, u3;
    Array2 u1_scaled, u2_scaled;
    double norm_uprime = 0;  // L2(omega) of (u1,u2)
    double norm_u3 = 0;
};

AveragedVelocity average_velocity(const DnsSolution& sol);

/// Column average of the pressure over fluid cells only.
Array2 column_pressure_average(const DnsSolution& sol);

/// Inputs of the scaling audit (one row per DNS run).
struct DnsRunSummary {
    double a_eps = 0, eps = 0, Lx = 0, Ly = 0;
    int n_c = 0;
    double norm_u_dilated = 0, norm_Du_dilated = 0;
};

DnsRunSummary summarize(const DnsSolution& sol);

struct ScalingRow {
    double a_eps = 0;
    double ratio_u = 0;   // ||u~|| / a^2
    double ratio_Du = 0;  // ||D_eps u~|| / a
};

struct ScalingReport {
    std::vector<ScalingRow> rows;  // ordered by decreasing a_eps
    bool bounded = true;           // no ratio grew by more than 2x down the list
};

/// Empirical check of the a priori velocity scalings over runs with
/// identical omega, eps, obstacle resolution. Throws InconsistentRuns.
ScalingReport scaling_audit(const std::vector<DnsRunSummary>& runs);

struct ComparisonReport {
    bool applicable = true;  // false for obstacle-free domains
    double a_eps = 0, eps = 0;
    double ratio_u = 0, ratio_Du = 0;
    double rel_err_velocity = 0;
    double rel_err_pressure = 0;
    double u3_ratio = 0;
};

/// Interior relative L2 discrepancy (one boundary-cell rim excluded)
/// between the scaled DNS column averages and the Darcy prediction, plus the
/// pressure discrepancy up to an additive constant (normalized by the larger
/// of the two pressure norms, which handles zero-pressure Darcy states). The
/// Darcy grid must equal the a_eps-column grid. Throws GridMismatch.
ComparisonReport darcy_comparison(const DnsSolution& dns, const DarcySolution& darcy);

/// Same computation from pre-extracted tables (used by the compare stage,
/// which works from files).
ComparisonReport compare_tables(double a_eps, double eps, double porosity,
                                double ratio_u, double ratio_Du, const Array2& ubar1,
                                const Array2& ubar2, const Array2& ubar3,
                                const Array2& pbar, const Array2& darcy_p,
                                const Array2& darcy_Ux, const Array2& darcy_Uy);

}  // namespace permahom
