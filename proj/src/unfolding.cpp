#include "permahom/unfolding.hpp"

#include <cmath>

#include "permahom/errors.hpp"

namespace permahom {

std::array<long long, 3> kappa(const std::array<double, 3>& point, double a_eps,
                               double eps) {
    if (!(a_eps > 0) || !(eps > 0)) throw ValidationError("kappa: a_eps, eps must be > 0");
    const std::array<double, 3> t = {point[0] / a_eps, point[1] / a_eps,
                                     eps * point[2] / a_eps};
    std::array<long long, 3> k;
    for (int i = 0; i < 3; ++i) {
        const double lo = std::floor(t[i]);
        const double frac = t[i] - lo;
        if (std::abs(frac - 0.5) <= 1e-12)
            throw OnCellBoundary("coordinate " + std::to_string(i) +
                                 " lies on a cell face (t = " + std::to_string(t[i]) +
                                 ")");
        k[i] = static_cast<long long>(std::llround(t[i]));
    }
    return k;
}

DilatedField DilatedField::zeros(const ThinDomainSpec& spec, int n_c, int ncomp) {
    if (n_c < 1) throw ValidationError("n_c must be >= 1");
    if (ncomp != 1 && ncomp != 3) throw ValidationError("fields are scalar or 3-vector");
    DilatedField f;
    f.spec = ThinDomainSpec::make(spec.Lx, spec.Ly, spec.epsilon, spec.a_eps);
    f.n_c = n_c;
    f.comp.assign(ncomp, Array3(f.spec.mx * n_c, f.spec.my * n_c, f.spec.mz * n_c));
    return f;
}

void DilatedField::check_aligned() const {
    if (comp.empty()) throw MisalignedGrid("field has no components");
    for (const auto& a : comp)
        if (a.nx() != spec.mx * n_c || a.ny() != spec.my * n_c || a.nz() != spec.mz * n_c)
            throw MisalignedGrid("field grid is not an exact tiling of microcells");
}

UnfoldedField unfold(const DilatedField& field) {
    field.check_aligned();
    UnfoldedField out;
    out.spec = field.spec;
    out.n_c = field.n_c;
    out.comp.assign(field.ncomp(), std::vector<double>(out.cells() * out.block()));
    const int nc = field.n_c;
    for (int c = 0; c < field.ncomp(); ++c) {
        const Array3& a = field.comp[c];
        for (int ck = 0; ck < field.spec.mz; ++ck)
            for (int cj = 0; cj < field.spec.my; ++cj)
                for (int ci = 0; ci < field.spec.mx; ++ci)
                    for (int rk = 0; rk < nc; ++rk)
                        for (int rj = 0; rj < nc; ++rj)
                            for (int ri = 0; ri < nc; ++ri)
                                out.comp[c][out.idx(ci, cj, ck, ri, rj, rk)] =
                                    a(ci * nc + ri, cj * nc + rj, ck * nc + rk);
    }
    return out;
}

DilatedField fold(const UnfoldedField& field) {
    DilatedField out = DilatedField::zeros(field.spec, field.n_c,
                                           static_cast<int>(field.comp.size()));
    const int nc = field.n_c;
    for (int c = 0; c < out.ncomp(); ++c) {
        Array3& a = out.comp[c];
        for (int ck = 0; ck < field.spec.mz; ++ck)
            for (int cj = 0; cj < field.spec.my; ++cj)
                for (int ci = 0; ci < field.spec.mx; ++ci)
                    for (int rk = 0; rk < nc; ++rk)
                        for (int rj = 0; rj < nc; ++rj)
                            for (int ri = 0; ri < nc; ++ri)
                                a(ci * nc + ri, cj * nc + rj, ck * nc + rk) =
                                    field.comp[c][field.idx(ci, cj, ck, ri, rj, rk)];
    }
    return out;
}

namespace {

double rel_defect(double lhs, double rhs) {
    const double den = std::max(std::abs(lhs), std::abs(rhs));
    if (den == 0.0) return 0.0;
    return std::abs(lhs - rhs) / den;
}

}  // namespace

UnfoldReport verify_norm_identities(const DilatedField& field) {
    field.check_aligned();
    const UnfoldedField hat = unfold(field);
    const ThinDomainSpec& s = field.spec;
    const int nc = field.n_c;
    const double a = s.a_eps;
    const double eps = s.epsilon;

    // Unfolded measure: (x',z3) cell measure a^2*(a/eps) times Y-voxel 1/nc^3.
    const double w_hat = (a * a * a / eps) / (nc * (double)nc * nc);
    const double w_til = field.voxel_measure();  // equals w_hat up to roundoff
    const double hy_vox = 1.0 / nc;              // Y voxel spacing

    double hatL2 = 0, tilL2 = 0;
    double hatGh = 0, tilGh = 0;  // horizontal gradient energies
    double hatGv = 0, tilGv = 0;  // vertical derivative energies

    for (int c = 0; c < field.ncomp(); ++c) {
        const auto& H = hat.comp[c];
        for (double v : H) hatL2 += v * v;
        const Array3& T = field.comp[c];
        for (std::size_t i = 0; i < T.size(); ++i) tilL2 += T[i] * T[i];

        // In-block forward differences on the unfolded side.
        for (int ck = 0; ck < s.mz; ++ck)
            for (int cj = 0; cj < s.my; ++cj)
                for (int ci = 0; ci < s.mx; ++ci)
                    for (int rk = 0; rk < nc; ++rk)
                        for (int rj = 0; rj < nc; ++rj)
                            for (int ri = 0; ri < nc; ++ri) {
                                const double v = H[hat.idx(ci, cj, ck, ri, rj, rk)];
                                if (ri + 1 < nc) {
                                    const double d =
                                        (H[hat.idx(ci, cj, ck, ri + 1, rj, rk)] - v) /
                                        hy_vox;
                                    hatGh += d * d;
                                }
                                if (rj + 1 < nc) {
                                    const double d =
                                        (H[hat.idx(ci, cj, ck, ri, rj + 1, rk)] - v) /
                                        hy_vox;
                                    hatGh += d * d;
                                }
                                if (rk + 1 < nc) {
                                    const double d =
                                        (H[hat.idx(ci, cj, ck, ri, rj, rk + 1)] - v) /
                                        hy_vox;
                                    hatGv += d * d;
                                }
                            }

        // Same pairs on the dilated side (cross-cell pairs excluded).
        const double ihx = 1.0 / field.hx();
        const double ihz = 1.0 / field.hz();
        for (int k = 0; k < T.nz(); ++k)
            for (int j = 0; j < T.ny(); ++j)
                for (int i = 0; i < T.nx(); ++i) {
                    const double v = T(i, j, k);
                    if ((i + 1) % nc != 0) {
                        const double d = (T(i + 1, j, k) - v) * ihx;
                        tilGh += d * d;
                    }
                    if ((j + 1) % nc != 0) {
                        const double d = (T(i, j + 1, k) - v) * ihx;
                        tilGh += d * d;
                    }
                    if ((k + 1) % nc != 0) {
                        const double d = (T(i, j, k + 1) - v) * ihz;
                        tilGv += d * d;
                    }
                }
    }

    UnfoldReport rep;
    rep.defect_a = rel_defect(w_hat * hatL2, w_til * tilL2);
    rep.defect_b = rel_defect(w_hat * hatGh, a * a * w_til * tilGh);
    const double f = (a / eps) * (a / eps);
    rep.defect_c = rel_defect(w_hat * hatGv, f * w_til * tilGv);
    return rep;
}

}  // namespace permahom
