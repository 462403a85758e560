#include "permahom/darcy2d.hpp"

#include <cmath>

namespace permahom {

namespace {
constexpr double kPi = 3.14159265358979323846;

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

Mat2 invert2x2(const Mat2& K) {
    const double det = K[0][0] * K[1][1] - K[0][1] * K[1][0];
    if (det == 0.0) throw SPDViolation("permeability tensor is singular");
    return Mat2{{{K[1][1] / det, -K[0][1] / det}, {-K[1][0] / det, K[0][0] / det}}};
}
}  // namespace

ForceKind force_kind_from_string(const std::string& s) {
    if (s == "constant") return ForceKind::constant;
    if (s == "gradient") return ForceKind::gradient;
    if (s == "vortex") return ForceKind::vortex;
    if (s == "manufactured") return ForceKind::manufactured;
    throw ValidationError("unknown force.kind '" + s + "'");
}

std::string to_string(ForceKind k) {
    switch (k) {
        case ForceKind::constant: return "constant";
        case ForceKind::gradient: return "gradient";
        case ForceKind::vortex: return "vortex";
        case ForceKind::manufactured: return "manufactured";
    }
    return "?";
}

void ForceSpec::validate() const {
    switch (kind) {
        case ForceKind::constant:
            if (params.size() != 2)
                throw ValidationError("force.params: constant needs exactly fx fy");
            break;
        case ForceKind::gradient:
        case ForceKind::vortex:
            if (params.empty() || params.size() > 3)
                throw ValidationError("force.params: expected A [mx my]");
            break;
        case ForceKind::manufactured:
            if (params.size() > 2)
                throw ValidationError("force.params: manufactured takes [Au Ap]");
            break;
    }
    for (double p : params)
        if (!std::isfinite(p)) throw ValidationError("force.params must be finite");
}

std::array<double, 2> ForceSpec::eval(double x, double y, double Lx, double Ly,
                                      const Mat2* K) const {
    switch (kind) {
        case ForceKind::constant:
            return {params[0], params[1]};
        case ForceKind::gradient: {
            const double A = params[0];
            const double mx = params.size() > 1 ? params[1] : 1.0;
            const double my = params.size() > 2 ? params[2] : 0.0;
            const double kx = mx * kPi / Lx, ky = my * kPi / Ly;
            return {-A * kx * std::sin(kx * x) * std::cos(ky * y),
                    -A * ky * std::cos(kx * x) * std::sin(ky * y)};
        }
        case ForceKind::vortex: {
            const double A = params[0];
            const double mx = params.size() > 1 ? params[1] : 1.0;
            const double my = params.size() > 2 ? params[2] : 1.0;
            const double kx = mx * kPi / Lx, ky = my * kPi / Ly;
            return {A * ky * std::sin(kx * x) * std::cos(ky * y),
                    -A * kx * std::cos(kx * x) * std::sin(ky * y)};
        }
        case ForceKind::manufactured: {
            if (!K)
                throw ValidationError(
                    "manufactured force needs a permeability tensor to evaluate");
            ManufacturedDarcy m;
            m.K = *K;
            m.Lx = Lx;
            m.Ly = Ly;
            m.amp_u = params.size() > 0 ? params[0] : 1.0;
            m.amp_p = params.size() > 1 ? params[1] : 1.0;
            return m.force(x, y);
        }
    }
    return {0, 0};
}

std::array<double, 2> ManufacturedDarcy::exact_velocity(double x, double y) const {
    const double kx = kPi / Lx, ky = kPi / Ly;
    const double sx = std::sin(kx * x), cx = std::cos(kx * x);
    const double sy = std::sin(ky * y), cy = std::cos(ky * y);
    // psi = amp_u sin^2(kx x) sin^2(ky y); U = (d2 psi, -d1 psi)
    return {amp_u * sx * sx * 2.0 * sy * cy * ky, -amp_u * 2.0 * sx * cx * kx * sy * sy};
}

double ManufacturedDarcy::exact_pressure(double x, double y) const {
    return amp_p * std::cos(kPi * x / Lx) * std::cos(kPi * y / Ly);
}

std::array<double, 2> ManufacturedDarcy::force(double x, double y) const {
    const double kx = kPi / Lx, ky = kPi / Ly;
    const std::array<double, 2> gp = {-amp_p * kx * std::sin(kx * x) * std::cos(ky * y),
                                      -amp_p * ky * std::cos(kx * x) * std::sin(ky * y)};
    const auto U = exact_velocity(x, y);
    const Mat2 Ki = invert2x2(K);
    return {gp[0] + Ki[0][0] * U[0] + Ki[0][1] * U[1],
            gp[1] + Ki[1][0] * U[0] + Ki[1][1] * U[1]};
}

namespace {

/// Tangential derivative estimates from cell samples with mirrored ghosts.
/// dy of P at cell (i,j); indices clamped (even reflection).
double cell_dy(const Array2& P, int i, int j, double hy) {
    const int gy = P.ny();
    const double up = P(i, clampi(j + 1, 0, gy - 1));
    const double dn = P(i, clampi(j - 1, 0, gy - 1));
    return (up - dn) / (2.0 * hy);
}

double cell_dx(const Array2& P, int i, int j, double hx) {
    const int gx = P.nx();
    const double up = P(clampi(i + 1, 0, gx - 1), j);
    const double dn = P(clampi(i - 1, 0, gx - 1), j);
    return (up - dn) / (2.0 * hx);
}

/// dpdy averaged onto the interior x-face i (between cells i-1 and i).
double face_x_tangential(const Array2& P, int i, int j, double hy) {
    return 0.5 * (cell_dy(P, i - 1, j, hy) + cell_dy(P, i, j, hy));
}

double face_y_tangential(const Array2& P, int i, int j, double hx) {
    return 0.5 * (cell_dx(P, i, j - 1, hx) + cell_dx(P, i, j, hx));
}

}  // namespace

BodyForce2D sample_force(const ForceSpec& spec, int gx, int gy, double Lx, double Ly,
                         const Mat2* K) {
    spec.validate();
    BodyForce2D f;
    f.gx = gx;
    f.gy = gy;
    f.Lx = Lx;
    f.Ly = Ly;
    f.hx = Lx / gx;
    f.hy = Ly / gy;
    f.fx_c = Array2(gx, gy);
    f.fy_c = Array2(gx, gy);
    f.fx_xf = Array2(gx + 1, gy);
    f.fy_xf = Array2(gx + 1, gy);
    f.fx_yf = Array2(gx, gy + 1);
    f.fy_yf = Array2(gx, gy + 1);

    if (spec.kind == ForceKind::gradient || spec.kind == ForceKind::constant) {
        // Discrete-gradient realization of conservative forces: sample the
        // potential at centers and difference it with exactly the stencils
        // the solver uses, so the force is absorbed by the pressure to
        // solver accuracy (a constant force is the gradient of an affine
        // potential).
        Array2 phi(gx, gy);
        if (spec.kind == ForceKind::constant) {
            for (int j = 0; j < gy; ++j)
                for (int i = 0; i < gx; ++i)
                    phi(i, j) = spec.params[0] * (i + 0.5) * f.hx +
                                spec.params[1] * (j + 0.5) * f.hy;
        } else {
            const double A = spec.params[0];
            const double mx = spec.params.size() > 1 ? spec.params[1] : 1.0;
            const double my = spec.params.size() > 2 ? spec.params[2] : 0.0;
            const double kx = mx * kPi / Lx, ky = my * kPi / Ly;
            for (int j = 0; j < gy; ++j)
                for (int i = 0; i < gx; ++i)
                    phi(i, j) = A * std::cos(kx * (i + 0.5) * f.hx) *
                                std::cos(ky * (j + 0.5) * f.hy);
        }
        for (int j = 0; j < gy; ++j)
            for (int i = 0; i < gx; ++i) {
                f.fx_c(i, j) = cell_dx(phi, i, j, f.hx);
                f.fy_c(i, j) = cell_dy(phi, i, j, f.hy);
            }
        for (int j = 0; j < gy; ++j)
            for (int i = 1; i < gx; ++i) {
                f.fx_xf(i, j) = (phi(i, j) - phi(i - 1, j)) / f.hx;
                f.fy_xf(i, j) = face_x_tangential(phi, i, j, f.hy);
            }
        for (int j = 1; j < gy; ++j)
            for (int i = 0; i < gx; ++i) {
                f.fy_yf(i, j) = (phi(i, j) - phi(i, j - 1)) / f.hy;
                f.fx_yf(i, j) = face_y_tangential(phi, i, j, f.hx);
            }
        return f;
    }

    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const auto v = spec.eval((i + 0.5) * f.hx, (j + 0.5) * f.hy, Lx, Ly, K);
            f.fx_c(i, j) = v[0];
            f.fy_c(i, j) = v[1];
        }
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i <= gx; ++i) {
            const auto v = spec.eval(i * f.hx, (j + 0.5) * f.hy, Lx, Ly, K);
            f.fx_xf(i, j) = v[0];
            f.fy_xf(i, j) = v[1];
        }
    for (int j = 0; j <= gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const auto v = spec.eval((i + 0.5) * f.hx, j * f.hy, Lx, Ly, K);
            f.fx_yf(i, j) = v[0];
            f.fy_yf(i, j) = v[1];
        }
    return f;
}

namespace {

/// Nine-point operator A = -div(K grad .) stored as per-cell 3x3 stencils
/// (mirror clamping keeps every contribution inside the 3x3 box).
class NinePoint {
public:
    NinePoint(int gx, int gy, double hx, double hy, const Mat2& K)
        : gx_(gx), gy_(gy), coef_(static_cast<std::size_t>(gx) * gy * 9, 0.0) {
        const double K11 = K[0][0], K22 = K[1][1];
        const double K12 = 0.5 * (K[0][1] + K[1][0]);
        // L = div(K grad p), assembled face by face, then negated.
        for (int j = 0; j < gy; ++j)
            for (int i = 1; i < gx; ++i) {
                const double c = hy * K11 / hx;
                for (int s = 0; s < 2; ++s) {
                    const int ri = s == 0 ? i - 1 : i;  // receiving cell
                    const double sg = s == 0 ? 1.0 : -1.0;
                    add(ri, j, i, j, sg * c);
                    add(ri, j, i - 1, j, -sg * c);
                    const double t = sg * 0.25 * K12;
                    add(ri, j, i - 1, j + 1, t);
                    add(ri, j, i - 1, j - 1, -t);
                    add(ri, j, i, j + 1, t);
                    add(ri, j, i, j - 1, -t);
                }
            }
        for (int j = 1; j < gy; ++j)
            for (int i = 0; i < gx; ++i) {
                const double c = hx * K22 / hy;
                for (int s = 0; s < 2; ++s) {
                    const int rj = s == 0 ? j - 1 : j;
                    const double sg = s == 0 ? 1.0 : -1.0;
                    add(i, rj, i, j, sg * c);
                    add(i, rj, i, j - 1, -sg * c);
                    const double t = sg * 0.25 * K12;
                    add(i, rj, i + 1, j - 1, t);
                    add(i, rj, i - 1, j - 1, -t);
                    add(i, rj, i + 1, j, t);
                    add(i, rj, i - 1, j, -t);
                }
            }
        for (double& v : coef_) v = -v;
    }

    void apply(const Array2& p, Array2& out) const {
        for (int j = 0; j < gy_; ++j)
            for (int i = 0; i < gx_; ++i) {
                const double* st = &coef_[(static_cast<std::size_t>(j) * gx_ + i) * 9];
                double acc = 0.0;
                int slot = 0;
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di, ++slot) {
                        const double c = st[slot];
                        if (c == 0.0) continue;
                        acc += c * p(i + di, j + dj);
                    }
                out(i, j) = acc;
            }
    }

    /// The operator must be exactly symmetric for CG; the mirror clamping
    /// preserves this, and the check guards future stencil edits.
    void require_symmetric() const {
        double m = 0.0, scale = 0.0;
        for (int j = 0; j < gy_; ++j)
            for (int i = 0; i < gx_; ++i) {
                int slot = 0;
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di, ++slot) {
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || ii >= gx_ || jj < 0 || jj >= gy_) continue;
                        const double a = coef_[(static_cast<std::size_t>(j) * gx_ + i) * 9 + slot];
                        const double b =
                            coef_[(static_cast<std::size_t>(jj) * gx_ + ii) * 9 +
                                  (1 - dj) * 3 + (1 - di)];
                        m = std::max(m, std::abs(a - b));
                        scale = std::max(scale, std::abs(a));
                    }
            }
        if (m > 1e-12 * scale)
            throw ValidationError("internal: darcy nine-point operator lost symmetry");
    }

private:
    void add(int ri, int rj, int i, int j, double v) {
        i = clampi(i, 0, gx_ - 1);
        j = clampi(j, 0, gy_ - 1);
        const int di = i - ri, dj = j - rj;
        coef_[(static_cast<std::size_t>(rj) * gx_ + ri) * 9 + (dj + 1) * 3 + (di + 1)] += v;
    }

    int gx_, gy_;
    std::vector<double> coef_;
};

void project_zero_mean(Array2& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
    const double m = s / static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= m;
}

double dot2(const Array2& a, const Array2& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Face fluxes of K(f - grad p); boundary faces are exactly zero.
void face_fluxes(const Mat2& K, const BodyForce2D& f, const Array2& p, Array2& Fx,
                 Array2& Fy) {
    const int gx = p.nx(), gy = p.ny();
    const double hx = f.hx, hy = f.hy;
    const double K11 = K[0][0], K22 = K[1][1], K12 = 0.5 * (K[0][1] + K[1][0]);
    Fx.fill(0.0);
    Fy.fill(0.0);
    for (int j = 0; j < gy; ++j)
        for (int i = 1; i < gx; ++i) {
            const double dpdx = (p(i, j) - p(i - 1, j)) / hx;
            const double dpdy = face_x_tangential(p, i, j, hy);
            Fx(i, j) = hy * (K11 * (f.fx_xf(i, j) - dpdx) + K12 * (f.fy_xf(i, j) - dpdy));
        }
    for (int j = 1; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const double dpdy = (p(i, j) - p(i, j - 1)) / hy;
            const double dpdx = face_y_tangential(p, i, j, hx);
            Fy(i, j) = hx * (K12 * (f.fx_yf(i, j) - dpdx) + K22 * (f.fy_yf(i, j) - dpdy));
        }
}

}  // namespace

DarcySolution solve_darcy(const Mat2& K, const BodyForce2D& f, int gx, int gy,
                          double rtol, int max_iters, const Array2* initial_guess) {
    if (gx < 4 || gy < 4) throw ValidationError("darcy grid must be at least 4x4");
    if (f.gx != gx || f.gy != gy)
        throw GridMismatch("body force was sampled on a different grid");
    {
        const auto eig = eigenvalues_sym2x2(K);
        if (!(eig[0] > 0.0))
            throw SPDViolation("darcy solve needs an SPD permeability tensor");
    }
    const double hx = f.hx, hy = f.hy;
    NinePoint A(gx, gy, hx, hy, K);
    A.require_symmetric();

    // b = -div(K f) in flux form (boundary fluxes zero).
    Array2 b(gx, gy, 0.0);
    {
        const double K11 = K[0][0], K22 = K[1][1], K12 = 0.5 * (K[0][1] + K[1][0]);
        for (int j = 0; j < gy; ++j)
            for (int i = 1; i < gx; ++i) {
                const double F = hy * (K11 * f.fx_xf(i, j) + K12 * f.fy_xf(i, j));
                b(i - 1, j) -= F;
                b(i, j) += F;
            }
        for (int j = 1; j < gy; ++j)
            for (int i = 0; i < gx; ++i) {
                const double F = hx * (K12 * f.fx_yf(i, j) + K22 * f.fy_yf(i, j));
                b(i, j - 1) -= F;
                b(i, j) += F;
            }
    }
    project_zero_mean(b);

    DarcySolution sol;
    sol.gx = gx;
    sol.gy = gy;
    sol.Lx = f.Lx;
    sol.Ly = f.Ly;
    sol.hx = hx;
    sol.hy = hy;
    sol.p = initial_guess ? *initial_guess : Array2(gx, gy, 0.0);
    if (initial_guess && !initial_guess->same_shape(b))
        throw GridMismatch("initial guess grid mismatch");
    project_zero_mean(sol.p);

    if (max_iters <= 0) max_iters = 100 * (gx + gy) + 1000;

    // CG on the zero-mean subspace.
    Array2 r(gx, gy), d(gx, gy), q(gx, gy);
    A.apply(sol.p, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    project_zero_mean(r);
    double rho = dot2(r, r);
    const double normb = std::sqrt(dot2(b, b));
    const double stop2 = rtol * rtol * std::max(normb * normb, 1e-300);
    d = r;
    int it = 0;
    std::vector<double> history;
    while (rho > stop2 && it < max_iters) {
        A.apply(d, q);
        project_zero_mean(q);
        const double dq = dot2(d, q);
        if (dq <= 0.0) break;
        const double alpha = rho / dq;
        for (std::size_t i = 0; i < sol.p.size(); ++i) sol.p[i] += alpha * d[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
        project_zero_mean(r);
        const double rho_new = dot2(r, r);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = r[i] + (rho_new / rho) * d[i];
        rho = rho_new;
        ++it;
        history.push_back(std::sqrt(rho));
    }
    if (rho > stop2 && normb > 0.0)
        throw NotConverged("darcy CG stalled at relative residual " +
                               std::to_string(std::sqrt(rho) / std::max(normb, 1e-300)),
                           history);
    project_zero_mean(sol.p);
    sol.iters = it;

    // Honest conservation audit from the assembled face fluxes.
    Array2 Fx(gx + 1, gy), Fy(gx, gy + 1);
    face_fluxes(K, f, sol.p, Fx, Fy);
    double fr = 0.0;
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i)
            fr = std::max(std::abs(Fx(i + 1, j) - Fx(i, j) + Fy(i, j + 1) - Fy(i, j)),
                          fr);
    sol.flux_residual = fr / (hx * hy);  // per unit volume, like div(K f)

    sol.Ux = Array2(gx, gy);
    sol.Uy = Array2(gx, gy);
    reconstruct_velocity(K, f, sol.p, sol.Ux, sol.Uy);
    return sol;
}

DarcySolution solve_darcy(const PermeabilityTensor& K, const BodyForce2D& f, int gx,
                          int gy, double rtol, int max_iters,
                          const Array2* initial_guess) {
    return solve_darcy(K.K, f, gx, gy, rtol, max_iters, initial_guess);
}

void reconstruct_velocity(const Mat2& K, const BodyForce2D& f, const Array2& p,
                          Array2& Ux, Array2& Uy) {
    const int gx = p.nx(), gy = p.ny();
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const double ex = f.fx_c(i, j) - cell_dx(p, i, j, f.hx);
            const double ey = f.fy_c(i, j) - cell_dy(p, i, j, f.hy);
            Ux(i, j) = K[0][0] * ex + K[0][1] * ey;
            Uy(i, j) = K[1][0] * ex + K[1][1] * ey;
        }
}

}  // namespace permahom
