#include "permahom/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace permahom {

StokesSystem::StokesSystem(const StaggeredGrid& grid, std::vector<std::uint8_t> cell_fluid)
    : grid_(grid), cell_fluid_(std::move(cell_fluid)) {
    if (cell_fluid_.size() != grid_.cell_count())
        throw MaskMismatch("cell mask size does not match grid");
    n_fluid_cells_ = 0;
    for (auto f : cell_fluid_) n_fluid_cells_ += (f != 0);

    for (int comp = 0; comp < 3; ++comp) {
        const int dx = grid_.face_dim(comp, 0);
        const int dy = grid_.face_dim(comp, 1);
        const int dz = grid_.face_dim(comp, 2);
        fixed_[comp].assign(static_cast<std::size_t>(dx) * dy * dz, 0);
        for (int k = 0; k < dz; ++k)
            for (int j = 0; j < dy; ++j)
                for (int i = 0; i < dx; ++i) {
                    int ci[3] = {i, j, k};
                    int cm[3] = {i, j, k};
                    cm[comp] -= 1;
                    // periodic wrap of the minus cell along the face normal
                    if (grid_.periodic_axis(comp) && cm[comp] < 0)
                        cm[comp] += grid_.cells(comp);
                    bool s = solid_at(cm[0], cm[1], cm[2]) || solid_at(ci[0], ci[1], ci[2]);
                    if (s) fixed_[comp][face_idx(comp, i, j, k)] = 1;
                }
    }
    n_free_faces_ = 0;
    for (int comp = 0; comp < 3; ++comp)
        for (auto f : fixed_[comp]) n_free_faces_ += (f == 0);
}

bool StokesSystem::solid_at(int i, int j, int k) const {
    int p[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
        const int n = grid_.cells(a);
        if (grid_.periodic_axis(a)) {
            p[a] = (p[a] % n + n) % n;
        } else if (p[a] < 0 || p[a] >= n) {
            return true;  // exterior counts as solid
        }
    }
    return cell_fluid_[cell_idx(p[0], p[1], p[2])] == 0;
}

StokesSystem StokesSystem::from_cell_mask(const CellMask& mask) {
    StaggeredGrid g;
    g.nx = g.ny = g.nz = mask.n;
    g.hx = g.hy = g.hz = mask.h();
    g.mode = BoundaryMode::periodic;
    return StokesSystem(g, mask.fluid);
}

StokesSystem StokesSystem::from_perforated(const PerforatedMask3D& mask,
                                           BoundaryMode mode) {
    StaggeredGrid g;
    g.nx = mask.nx;
    g.ny = mask.ny;
    g.nz = mask.nz;
    g.hx = g.hy = g.hz = mask.h();
    g.mode = mode;
    return StokesSystem(g, mask.fluid);
}

StokesSystem StokesSystem::all_fluid(const StaggeredGrid& grid) {
    return StokesSystem(grid, std::vector<std::uint8_t>(grid.cell_count(), 1));
}

void StokesSystem::apply_neg_laplacian(const FaceField& u, FaceField& out) const {
    const double inv2[3] = {1.0 / (grid_.hx * grid_.hx), 1.0 / (grid_.hy * grid_.hy),
                            1.0 / (grid_.hz * grid_.hz)};
    const bool per[3] = {grid_.periodic_axis(0), grid_.periodic_axis(1),
                         grid_.periodic_axis(2)};
    for (int comp = 0; comp < 3; ++comp) {
        const Array3& a = u.c[comp];
        Array3& o = out.c[comp];
        const int dx = a.nx(), dy = a.ny(), dz = a.nz();
        const std::size_t stride[3] = {1, static_cast<std::size_t>(dx),
                                       static_cast<std::size_t>(dx) * dy};
        const std::vector<std::uint8_t>& fx = fixed_[comp];
        const double* ad = a.data();
        double* od = o.data();

        for (int k = 0; k < dz; ++k)
            for (int j = 0; j < dy; ++j)
                for (int i = 0; i < dx; ++i) {
                    const std::size_t id = (static_cast<std::size_t>(k) * dy + j) * dx + i;
                    const double uc = ad[id];
                    if (fx[id]) {
                        od[id] = uc;  // Dirichlet elimination: identity row
                        continue;
                    }
                    const int pos[3] = {i, j, k};
                    const int dims[3] = {dx, dy, dz};
                    double acc = 0.0;
                    for (int axis = 0; axis < 3; ++axis) {
                        double um, up;
                        if (pos[axis] > 0) {
                            um = ad[id - stride[axis]];
                        } else if (per[axis]) {
                            um = ad[id + static_cast<std::size_t>(dims[axis] - 1) *
                                             stride[axis]];
                        } else {
                            // Tangential wall ghost; normal faces at a wall
                            // are constrained and never reach this branch.
                            um = (comp == axis) ? 0.0 : -uc;
                        }
                        if (pos[axis] < dims[axis] - 1) {
                            up = ad[id + stride[axis]];
                        } else if (per[axis]) {
                            up = ad[id - static_cast<std::size_t>(dims[axis] - 1) *
                                             stride[axis]];
                        } else {
                            up = (comp == axis) ? 0.0 : -uc;
                        }
                        acc += (2.0 * uc - um - up) * inv2[axis];
                    }
                    od[id] = acc;
                }
    }
}

void StokesSystem::apply_gradient(const Array3& p, FaceField& out) const {
    for (int comp = 0; comp < 3; ++comp) {
        Array3& o = out.c[comp];
        const int dx = o.nx(), dy = o.ny(), dz = o.nz();
        const double ih = 1.0 / grid_.spacing(comp);
        const bool wrap = grid_.periodic_axis(comp);
        const std::vector<std::uint8_t>& fx = fixed_[comp];
        for (int k = 0; k < dz; ++k)
            for (int j = 0; j < dy; ++j)
                for (int i = 0; i < dx; ++i) {
                    const std::size_t id = (static_cast<std::size_t>(k) * dy + j) * dx + i;
                    if (fx[id]) {
                        o[id] = 0.0;
                        continue;
                    }
                    int cp[3] = {i, j, k};
                    int cm[3] = {i, j, k};
                    cm[comp] -= 1;
                    if (wrap && cm[comp] < 0) cm[comp] += grid_.cells(comp);
                    o[id] = (p(cp[0], cp[1], cp[2]) - p(cm[0], cm[1], cm[2])) * ih;
                }
    }
}

void StokesSystem::apply_divergence(const FaceField& u, Array3& out) const {
    const int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
    const bool px = grid_.periodic_axis(0), py = grid_.periodic_axis(1),
               pz = grid_.periodic_axis(2);
    const double ihx = 1.0 / grid_.hx, ihy = 1.0 / grid_.hy, ihz = 1.0 / grid_.hz;
    const Array3& u0 = u.c[0];
    const Array3& u1 = u.c[1];
    const Array3& u2 = u.c[2];
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (!cell_is_fluid(i, j, k)) {
                    out(i, j, k) = 0.0;
                    continue;
                }
                const int ip = px ? (i + 1) % nx : i + 1;
                const int jp = py ? (j + 1) % ny : j + 1;
                const int kp = pz ? (k + 1) % nz : k + 1;
                out(i, j, k) = (u0(ip, j, k) - u0(i, j, k)) * ihx +
                               (u1(i, jp, k) - u1(i, j, k)) * ihy +
                               (u2(i, j, kp) - u2(i, j, k)) * ihz;
            }
}

void StokesSystem::mask_faces(FaceField& u) const {
    for (int comp = 0; comp < 3; ++comp) {
        const auto& fx = fixed_[comp];
        Array3& a = u.c[comp];
        for (std::size_t id = 0; id < a.size(); ++id)
            if (fx[id]) a[id] = 0.0;
    }
}

void StokesSystem::project_zero_mean(Array3& p) const {
    if (n_fluid_cells_ == 0) return;
    double sum = 0.0;
    for (std::size_t id = 0; id < p.size(); ++id)
        if (cell_fluid_[id]) sum += p[id];
    const double mean = sum / static_cast<double>(n_fluid_cells_);
    for (std::size_t id = 0; id < p.size(); ++id)
        p[id] = cell_fluid_[id] ? p[id] - mean : 0.0;
}

double StokesSystem::max_abs_divergence(const FaceField& u) const {
    Array3 d = make_cell_array();
    apply_divergence(u, d);
    double m = 0.0;
    for (std::size_t id = 0; id < d.size(); ++id) m = std::max(m, std::abs(d[id]));
    return m;
}

double StokesSystem::dirichlet_energy(const FaceField& u, const FaceField& v) const {
    FaceField tmp = make_face_field();
    apply_neg_laplacian(u, tmp);
    return grid_.cell_volume() * dot(tmp, v);
}

double StokesSystem::dot(const Array3& a, const Array3& b) {
    double s = 0.0;
    const double* ad = a.data();
    const double* bd = b.data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) s += ad[i] * bd[i];
    return s;
}

double StokesSystem::dot(const FaceField& a, const FaceField& b) {
    return dot(a.c[0], b.c[0]) + dot(a.c[1], b.c[1]) + dot(a.c[2], b.c[2]);
}

namespace {

void axpy(double alpha, const FaceField& x, FaceField& y) {
    for (int c = 0; c < 3; ++c) {
        const double* xd = x.c[c].data();
        double* yd = y.c[c].data();
        const std::size_t n = x.c[c].size();
        for (std::size_t i = 0; i < n; ++i) yd[i] += alpha * xd[i];
    }
}

void axpy(double alpha, const Array3& x, Array3& y) {
    const double* xd = x.data();
    double* yd = y.data();
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) yd[i] += alpha * xd[i];
}

void scale_add(const FaceField& r, double beta, FaceField& d) {  // d = r + beta*d
    for (int c = 0; c < 3; ++c) {
        const double* rd = r.c[c].data();
        double* dd = d.c[c].data();
        const std::size_t n = r.c[c].size();
        for (std::size_t i = 0; i < n; ++i) dd[i] = rd[i] + beta * dd[i];
    }
}

void scale_add(const Array3& r, double beta, Array3& d) {
    const double* rd = r.data();
    double* dd = d.data();
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) dd[i] = rd[i] + beta * dd[i];
}

void copy(const FaceField& a, FaceField& b) {
    for (int c = 0; c < 3; ++c) b.c[c] = a.c[c];
}

/// CG for nu*(-Lap) x = rhs on the unconstrained-face subspace.
/// rhs must vanish on constrained faces; x starts from zero.
/// Returns the iteration count.
int cg_viscous(const StokesSystem& sys, double nu, const FaceField& rhs, FaceField& x,
               double rtol, int maxit, FaceField& r, FaceField& d, FaceField& q) {
    for (int c = 0; c < 3; ++c) x.c[c].fill(0.0);
    copy(rhs, r);
    double rho = StokesSystem::dot(r, r);
    const double stop2 = rtol * rtol * rho;
    if (rho == 0.0) return 0;
    copy(r, d);
    int it = 0;
    while (it < maxit) {
        sys.apply_neg_laplacian(d, q);
        for (int c = 0; c < 3; ++c) {
            double* qd = q.c[c].data();
            const std::size_t n = q.c[c].size();
            for (std::size_t i = 0; i < n; ++i) qd[i] *= nu;
        }
        const double dq = StokesSystem::dot(d, q);
        if (dq <= 0.0) break;  // numerically exhausted
        const double alpha = rho / dq;
        axpy(alpha, d, x);
        axpy(-alpha, q, r);
        const double rho_new = StokesSystem::dot(r, r);
        ++it;
        if (rho_new <= stop2) break;
        scale_add(r, rho_new / rho, d);
        rho = rho_new;
    }
    return it;
}

}  // namespace

StokesResult solve_stokes(const StokesSystem& sys, const FaceField& rhs,
                          const SolverConfig& cfg) {
    cfg.validate();
    StokesResult res;
    res.u = sys.make_face_field();
    res.p = sys.make_cell_array();

    FaceField b = rhs;
    sys.mask_faces(b);
    const double normb = std::sqrt(StokesSystem::dot(b, b));

    if (sys.unconstrained_face_count() == 0 || normb == 0.0) {
        res.converged = true;
        return res;  // fully constrained or zero data: u = 0, p = 0
    }

    // Work arrays.
    FaceField z = sys.make_face_field();
    FaceField v = sys.make_face_field();
    FaceField cg_r = sys.make_face_field();
    FaceField cg_d = sys.make_face_field();
    FaceField cg_q = sys.make_face_field();
    FaceField mom = sys.make_face_field();
    Array3 r = sys.make_cell_array();
    Array3 d = sys.make_cell_array();
    Array3 q = sys.make_cell_array();

    double eta = 0.02 * cfg.tol_mom;  // inner CG relative tolerance

    // u0 = A^{-1} b
    res.inner_iters += cg_viscous(sys, cfg.nu, b, res.u, eta, cfg.max_inner,
                                  cg_r, cg_d, cg_q);

    // Outer CG on the Schur complement S = G^T A^{-1} G (SPD on zero-mean
    // pressures): r = -div(u) tracks the true divergence residual.
    sys.apply_divergence(res.u, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = -r[i];
    sys.project_zero_mean(r);

    double rho = StokesSystem::dot(r, r);
    bool have_dir = false;
    double best_div = std::numeric_limits<double>::infinity();
    int since_best = 0;

    auto true_residuals = [&](double& mom_rel, double& div_max) {
        sys.apply_neg_laplacian(res.u, mom);
        sys.apply_gradient(res.p, v);
        double s = 0.0;
        for (int c = 0; c < 3; ++c) {
            const auto& fx = sys.fixed_mask(c);
            const double* md = mom.c[c].data();
            const double* vd = v.c[c].data();
            const double* bd = b.c[c].data();
            const std::size_t n = mom.c[c].size();
            for (std::size_t i = 0; i < n; ++i) {
                if (fx[i]) continue;
                const double e = cfg.nu * md[i] + vd[i] - bd[i];
                s += e * e;
            }
        }
        mom_rel = std::sqrt(s) / normb;
        div_max = sys.max_abs_divergence(res.u);
    };

    for (int outer = 0; outer <= cfg.max_outer; ++outer) {
        double mom_rel, div_max;
        true_residuals(mom_rel, div_max);
        res.mom_residual = mom_rel;
        res.div_residual = div_max;
        res.div_history.push_back(div_max);
        if (mom_rel <= cfg.tol_mom && div_max <= cfg.tol_div) {
            res.outer_iters = outer;
            res.converged = true;
            return res;
        }
        if (outer == cfg.max_outer) break;

        // Stall guard: tighten the inner tolerance if the divergence
        // residual stops improving.
        if (div_max < 0.5 * best_div) {
            best_div = div_max;
            since_best = 0;
        } else if (++since_best > 60 && eta > 1e-13) {
            eta *= 0.1;
            since_best = 0;
            have_dir = false;  // restart the Krylov direction
        }

        if (!have_dir) {
            d = r;
            rho = StokesSystem::dot(r, r);
            have_dir = true;
        }
        sys.apply_gradient(d, v);
        res.inner_iters += cg_viscous(sys, cfg.nu, v, z, eta, cfg.max_inner,
                                      cg_r, cg_d, cg_q);
        sys.apply_divergence(z, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = -q[i];
        sys.project_zero_mean(q);

        const double dq = StokesSystem::dot(d, q);
        if (dq <= 0.0) {
            have_dir = false;
            continue;
        }
        const double alpha = rho / dq;
        axpy(alpha, d, res.p);
        sys.project_zero_mean(res.p);
        axpy(-alpha, z, res.u);
        axpy(-alpha, q, r);
        sys.project_zero_mean(r);
        const double rho_new = StokesSystem::dot(r, r);
        scale_add(r, rho_new / rho, d);
        rho = rho_new;
        res.outer_iters = outer + 1;
    }

    throw NotConverged("Stokes solve did not reach tolerances within " +
                           std::to_string(cfg.max_outer) + " outer iterations (mom=" +
                           std::to_string(res.mom_residual) + ", div=" +
                           std::to_string(res.div_residual) + ")",
                       res.div_history);
}

}  // namespace permahom
