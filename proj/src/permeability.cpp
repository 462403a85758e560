#include "permahom/permeability.hpp"

#include <cmath>

namespace permahom {

namespace {

void require_compatible(const CellSolution& a, const CellSolution& b) {
    if (a.mask.n != b.mask.n || a.mask.fluid != b.mask.fluid)
        throw MaskMismatch("cell solutions were computed on different masks");
    if (a.nu != b.nu)
        throw MaskMismatch("cell solutions were computed with different viscosities");
    if (!((a.forcing_index == 1 && b.forcing_index == 2) ||
          (a.forcing_index == 2 && b.forcing_index == 1)))
        throw ValidationError("permeability assembly needs the e1 and e2 solutions");
}

/// Restricted discrete energy: sum over periodic face-difference pairs with
/// both faces unconstrained of dA*dB, per component and axis, weighted by
/// cell volume / spacing^2. Lexicographic order for reproducibility.
double fluid_pair_energy(const StokesSystem& sys, const FaceField& wa,
                         const FaceField& wb) {
    const StaggeredGrid& g = sys.grid();
    const double vol = g.cell_volume();
    double total = 0.0;
    for (int comp = 0; comp < 3; ++comp) {
        const Array3& A = wa.c[comp];
        const Array3& B = wb.c[comp];
        const int dx = A.nx(), dy = A.ny(), dz = A.nz();
        const auto& fx = sys.fixed_mask(comp);
        for (int axis = 0; axis < 3; ++axis) {
            const double w = vol / (g.spacing(axis) * g.spacing(axis));
            double s = 0.0;
            for (int k = 0; k < dz; ++k)
                for (int j = 0; j < dy; ++j)
                    for (int i = 0; i < dx; ++i) {
                        int ii = i, jj = j, kk = k;
                        if (axis == 0) ii = (i + 1) % dx;
                        else if (axis == 1) jj = (j + 1) % dy;
                        else kk = (k + 1) % dz;
                        const std::size_t f0 = A.idx(i, j, k);
                        const std::size_t f1 = A.idx(ii, jj, kk);
                        if (fx[f0] || fx[f1]) continue;
                        s += (A[f1] - A[f0]) * (B[f1] - B[f0]);
                    }
            total += w * s;
        }
    }
    return total;
}

}  // namespace

Mat2 assemble_K_energy(const CellSolution& sol1, const CellSolution& sol2) {
    require_compatible(sol1, sol2);
    const CellSolution* sols[2] = {&sol1, &sol2};
    if (sol1.forcing_index == 2) std::swap(sols[0], sols[1]);

    StokesSystem sys = StokesSystem::from_cell_mask(sols[0]->mask);
    Mat2 K;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            K[i][j] = sols[0]->nu * fluid_pair_energy(sys, sols[i]->w, sols[j]->w);
    return K;
}

Mat2 assemble_K_mean(const CellSolution& sol1, const CellSolution& sol2) {
    require_compatible(sol1, sol2);
    const CellSolution* sols[2] = {&sol1, &sol2};
    if (sol1.forcing_index == 2) std::swap(sols[0], sols[1]);

    Mat2 K;
    for (int i = 0; i < 2; ++i) {
        const auto mean = solution_mean_velocity(*sols[i]);
        K[i][0] = mean[0];
        K[i][1] = mean[1];
    }
    return K;
}

PermeabilityTensor assemble_permeability(const CellSolution& sol1,
                                         const CellSolution& sol2) {
    PermeabilityTensor t;
    Mat2 Ke = assemble_K_energy(sol1, sol2);
    t.K_alt = assemble_K_mean(sol1, sol2);
    t.nu = sol1.nu;
    t.n = sol1.mask.n;
    t.symmetry_defect = std::abs(Ke[0][1] - Ke[1][0]);
    // Symmetrize; the defect above records the (summation-order) asymmetry.
    t.K[0][0] = Ke[0][0];
    t.K[1][1] = Ke[1][1];
    t.K[0][1] = t.K[1][0] = 0.5 * (Ke[0][1] + Ke[1][0]);
    double gap = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            gap = std::max(gap, std::abs(t.K[i][j] - t.K_alt[i][j]));
    t.consistency_gap = gap;
    return t;
}

std::array<double, 2> eigenvalues_sym2x2(const Mat2& m) {
    const double tr = m[0][0] + m[1][1];
    const double off = 0.5 * (m[0][1] + m[1][0]);
    const double disc = std::sqrt(0.25 * (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) +
                                  off * off);
    return {0.5 * tr - disc, 0.5 * tr + disc};
}

CertifyReport certify(const PermeabilityTensor& K) {
    CertifyReport rep;
    const auto eig = eigenvalues_sym2x2(K.K);
    rep.eig_min = eig[0];
    rep.eig_max = eig[1];
    rep.symmetry_defect = K.symmetry_defect;
    rep.consistency_gap = K.consistency_gap;
    if (!(rep.eig_min > 0.0))
        throw SPDViolation("permeability tensor is not positive definite (eig_min = " +
                           std::to_string(rep.eig_min) +
                           "); the cell solve is under-resolved or not converged");
    return rep;
}

}  // namespace permahom
