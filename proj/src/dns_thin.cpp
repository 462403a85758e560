#include "permahom/dns_thin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace permahom {

DnsSolution solve_dns(const PerforatedMask3D& mask, const ForceSpec& force,
                      const SolverConfig& cfg, long long unknown_cap,
                      bool override_cap, BoundaryMode mode) {
    force.validate();
    if (force.kind == ForceKind::manufactured)
        throw ValidationError("manufactured forcing is a Darcy-only construct");
    if (mode == BoundaryMode::periodic)
        throw ValidationError("DNS supports the closed box or the channel mode");

    StokesSystem sys = StokesSystem::from_perforated(mask, mode);
    const StaggeredGrid& g = sys.grid();

    long long unknowns = static_cast<long long>(g.cell_count());
    for (int c = 0; c < 3; ++c)
        unknowns += static_cast<long long>(g.face_dim(c, 0)) * g.face_dim(c, 1) *
                    g.face_dim(c, 2);
    if (unknowns > unknown_cap && !override_cap)
        throw GridTooLarge("DNS grid has " + std::to_string(unknowns) +
                           " unknowns, above the cap of " + std::to_string(unknown_cap) +
                           " (pass --override-grid-cap to force)");

    // Body force (f'(x'), 0) evaluated at face centers.
    FaceField rhs = sys.make_face_field();
    const double Lx = mask.spec.Lx, Ly = mask.spec.Ly;
    for (int comp = 0; comp < 2; ++comp) {
        Array3& a = rhs.c[comp];
        for (int k = 0; k < a.nz(); ++k)
            for (int j = 0; j < a.ny(); ++j)
                for (int i = 0; i < a.nx(); ++i) {
                    const double x = (comp == 0) ? i * g.hx : (i + 0.5) * g.hx;
                    const double y = (comp == 1) ? j * g.hy : (j + 0.5) * g.hy;
                    a(i, j, k) = force.eval(x, y, Lx, Ly)[comp];
                }
    }
    sys.mask_faces(rhs);

    StokesResult r = solve_stokes(sys, rhs, cfg);

    DnsSolution sol;
    sol.spec = mask.spec;
    sol.n_c = mask.n_c;
    sol.nu = cfg.nu;
    sol.porosity = porosity(mask);
    sol.grid = g;
    sol.cell_fluid = mask.fluid;
    sol.u = std::move(r.u);
    sol.p = std::move(r.p);
    sol.mom_residual = r.mom_residual;
    sol.div_residual = r.div_residual;
    sol.outer_iters = r.outer_iters;
    sol.inner_iters = r.inner_iters;

    const double eps = mask.spec.epsilon;
    sol.norm_u_dilated =
        std::sqrt(g.cell_volume() * StokesSystem::dot(sol.u, sol.u) / eps);
    sol.norm_Du_dilated = std::sqrt(sys.dirichlet_energy(sol.u, sol.u) / eps);
    return sol;
}

AveragedVelocity average_velocity(const DnsSolution& sol) {
    const StaggeredGrid& g = sol.grid;
    const ThinDomainSpec& s = sol.spec;
    const int nc = sol.n_c;

    AveragedVelocity avg;
    avg.mx = s.mx;
    avg.my = s.my;
    avg.a_eps = s.a_eps;
    avg.u1 = Array2(s.mx, s.my, 0.0);
    avg.u2 = Array2(s.mx, s.my, 0.0);
    avg.u3 = Array2(s.mx, s.my, 0.0);

    // Cell-center interpolation of each component, accumulated per column;
    // the zero-extended field needs no special casing since constrained
    // faces hold zeros. The right face wraps along periodic axes.
    const Array3& u0 = sol.u.c[0];
    const Array3& u1 = sol.u.c[1];
    const Array3& u2 = sol.u.c[2];
    const bool px = g.periodic_axis(0), py = g.periodic_axis(1),
               pz = g.periodic_axis(2);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int ip = px ? (i + 1) % g.nx : i + 1;
                const int jp = py ? (j + 1) % g.ny : j + 1;
                const int kp = pz ? (k + 1) % g.nz : k + 1;
                const double c0 = 0.5 * (u0(i, j, k) + u0(ip, j, k));
                const double c1 = 0.5 * (u1(i, j, k) + u1(i, jp, k));
                const double c2 = 0.5 * (u2(i, j, k) + u2(i, j, kp));
                avg.u1(i / nc, j / nc) += c0;
                avg.u2(i / nc, j / nc) += c1;
                avg.u3(i / nc, j / nc) += c2;
            }
    const double column_volume = s.a_eps * s.a_eps * s.epsilon;
    const double w = g.cell_volume() / column_volume;
    for (std::size_t id = 0; id < avg.u1.size(); ++id) {
        avg.u1[id] *= w;
        avg.u2[id] *= w;
        avg.u3[id] *= w;
    }

    const double inv_a2 = 1.0 / (s.a_eps * s.a_eps);
    avg.u1_scaled = avg.u1;
    avg.u2_scaled = avg.u2;
    for (std::size_t id = 0; id < avg.u1.size(); ++id) {
        avg.u1_scaled[id] *= inv_a2;
        avg.u2_scaled[id] *= inv_a2;
    }

    const double cell_area = s.a_eps * s.a_eps;
    double su = 0.0, s3 = 0.0;
    for (std::size_t id = 0; id < avg.u1.size(); ++id) {
        su += avg.u1[id] * avg.u1[id] + avg.u2[id] * avg.u2[id];
        s3 += avg.u3[id] * avg.u3[id];
    }
    avg.norm_uprime = std::sqrt(cell_area * su);
    avg.norm_u3 = std::sqrt(cell_area * s3);
    return avg;
}

Array2 column_pressure_average(const DnsSolution& sol) {
    const StaggeredGrid& g = sol.grid;
    const ThinDomainSpec& s = sol.spec;
    const int nc = sol.n_c;
    Array2 sum(s.mx, s.my, 0.0);
    Array2 cnt(s.mx, s.my, 0.0);

    // Fluid-cell averages only; the analysis-side pressure extension is not
    // reproduced.
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t id =
                    (static_cast<std::size_t>(k) * g.ny + j) * g.nx + i;
                if (!sol.cell_fluid[id]) continue;
                sum(i / nc, j / nc) += sol.p(i, j, k);
                cnt(i / nc, j / nc) += 1.0;
            }
    for (std::size_t id = 0; id < sum.size(); ++id)
        sum[id] = cnt[id] > 0 ? sum[id] / cnt[id] : 0.0;
    return sum;
}

DnsRunSummary summarize(const DnsSolution& sol) {
    DnsRunSummary s;
    s.a_eps = sol.spec.a_eps;
    s.eps = sol.spec.epsilon;
    s.Lx = sol.spec.Lx;
    s.Ly = sol.spec.Ly;
    s.n_c = sol.n_c;
    s.norm_u_dilated = sol.norm_u_dilated;
    s.norm_Du_dilated = sol.norm_Du_dilated;
    return s;
}

ScalingReport scaling_audit(const std::vector<DnsRunSummary>& runs) {
    if (runs.size() < 2)
        throw InconsistentRuns("scaling audit needs at least two runs");
    for (std::size_t i = 1; i < runs.size(); ++i) {
        const auto& a = runs[0];
        const auto& b = runs[i];
        if (std::abs(a.eps - b.eps) > 1e-12 || std::abs(a.Lx - b.Lx) > 1e-12 ||
            std::abs(a.Ly - b.Ly) > 1e-12 || a.n_c != b.n_c)
            throw InconsistentRuns(
                "runs differ in omega, eps or voxel density per cell");
    }
    std::vector<DnsRunSummary> sorted = runs;
    std::sort(sorted.begin(), sorted.end(),
              [](const DnsRunSummary& a, const DnsRunSummary& b) {
                  return a.a_eps > b.a_eps;
              });
    ScalingReport rep;
    for (const auto& r : sorted) {
        ScalingRow row;
        row.a_eps = r.a_eps;
        row.ratio_u = r.norm_u_dilated / (r.a_eps * r.a_eps);
        row.ratio_Du = r.norm_Du_dilated / r.a_eps;
        rep.rows.push_back(row);
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& prev = rep.rows[i - 1];
        const auto& cur = rep.rows[i];
        if (cur.ratio_u > 2.0 * prev.ratio_u || cur.ratio_Du > 2.0 * prev.ratio_Du)
            rep.bounded = false;
    }
    return rep;
}

namespace {

double interior_l2(const Array2& a, int rim) {
    double s = 0.0;
    for (int j = rim; j < a.ny() - rim; ++j)
        for (int i = rim; i < a.nx() - rim; ++i) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

double interior_mean(const Array2& a, int rim) {
    double s = 0.0;
    int n = 0;
    for (int j = rim; j < a.ny() - rim; ++j)
        for (int i = rim; i < a.nx() - rim; ++i) {
            s += a(i, j);
            ++n;
        }
    return n > 0 ? s / n : 0.0;
}

}  // namespace

ComparisonReport compare_tables(double a_eps, double eps, double porosity,
                                double ratio_u, double ratio_Du, const Array2& ubar1,
                                const Array2& ubar2, const Array2& ubar3,
                                const Array2& pbar, const Array2& darcy_p,
                                const Array2& darcy_Ux, const Array2& darcy_Uy) {
    const int mx = ubar1.nx(), my = ubar1.ny();
    if (!darcy_p.same_shape(ubar1) || !darcy_Ux.same_shape(ubar1) ||
        !darcy_Uy.same_shape(ubar1) || !pbar.same_shape(ubar1))
        throw GridMismatch("darcy cells must equal the a_eps columns");
    if (mx < 3 || my < 3)
        throw GridMismatch("domain too small for a rim-excluded comparison");

    ComparisonReport rep;
    rep.a_eps = a_eps;
    rep.eps = eps;
    rep.ratio_u = ratio_u;
    rep.ratio_Du = ratio_Du;

    if (porosity >= 1.0) {
        // Obstacle-free domains have no Darcy limit to compare against.
        rep.applicable = false;
        rep.rel_err_velocity = std::numeric_limits<double>::quiet_NaN();
        rep.rel_err_pressure = std::numeric_limits<double>::quiet_NaN();
        rep.u3_ratio = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    const int rim = 1;
    const double inv_a2 = 1.0 / (a_eps * a_eps);
    Array2 dvx(mx, my), dvy(mx, my);
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            dvx(i, j) = ubar1(i, j) * inv_a2 - darcy_Ux(i, j);
            dvy(i, j) = ubar2(i, j) * inv_a2 - darcy_Uy(i, j);
        }
    const double num = std::sqrt(interior_l2(dvx, rim) * interior_l2(dvx, rim) +
                                 interior_l2(dvy, rim) * interior_l2(dvy, rim));
    const double den = std::sqrt(interior_l2(darcy_Ux, rim) * interior_l2(darcy_Ux, rim) +
                                 interior_l2(darcy_Uy, rim) * interior_l2(darcy_Uy, rim));
    rep.rel_err_velocity = den > 0 ? num / den : num;

    // Pressure: align interior means, then L2 relative to the larger of the
    // two sides (the Darcy pressure can be legitimately zero, e.g. for a
    // divergence-free force with isotropic K).
    Array2 dp(mx, my);
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) dp(i, j) = pbar(i, j) - darcy_p(i, j);
    const double shift = interior_mean(dp, rim);
    for (std::size_t id = 0; id < dp.size(); ++id) dp[id] -= shift;
    Array2 pc = darcy_p;
    const double pmean = interior_mean(pc, rim);
    for (std::size_t id = 0; id < pc.size(); ++id) pc[id] -= pmean;
    Array2 pb = pbar;
    const double pbmean = interior_mean(pb, rim);
    for (std::size_t id = 0; id < pb.size(); ++id) pb[id] -= pbmean;
    const double pden = std::max(interior_l2(pc, rim), interior_l2(pb, rim));
    rep.rel_err_pressure = pden > 0 ? interior_l2(dp, rim) / pden : 0.0;

    Array2 ub1 = ubar1, ub2 = ubar2;
    const double nprime = std::sqrt(interior_l2(ub1, rim) * interior_l2(ub1, rim) +
                                    interior_l2(ub2, rim) * interior_l2(ub2, rim));
    const double n3 = interior_l2(ubar3, rim);
    rep.u3_ratio = nprime > 0 ? n3 / nprime : 0.0;
    return rep;
}

ComparisonReport darcy_comparison(const DnsSolution& dns, const DarcySolution& darcy) {
    const ThinDomainSpec& s = dns.spec;
    if (darcy.gx != s.mx || darcy.gy != s.my ||
        std::abs(darcy.Lx - s.Lx) > 1e-12 * std::max(1.0, s.Lx) ||
        std::abs(darcy.Ly - s.Ly) > 1e-12 * std::max(1.0, s.Ly))
        throw GridMismatch("darcy grid does not match the a_eps-column grid");

    AveragedVelocity avg = average_velocity(dns);
    Array2 pbar = column_pressure_average(dns);
    DnsRunSummary sum = summarize(dns);
    return compare_tables(s.a_eps, s.epsilon, dns.porosity,
                          sum.norm_u_dilated / (s.a_eps * s.a_eps),
                          sum.norm_Du_dilated / s.a_eps, avg.u1, avg.u2, avg.u3, pbar,
                          darcy.p, darcy.Ux, darcy.Uy);
}

}  // namespace permahom
