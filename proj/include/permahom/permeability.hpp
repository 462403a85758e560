#pragma once

#include <array>

#include "permahom/cell_stokes.hpp"

namespace permahom {

using Mat2 = std::array<std::array<double, 2>, 2>;

/// 2x2 permeability tensor with assembly metadata. K is the canonical
/// (energy-form) tensor used downstream; K_alt is the mean-velocity form
/// used as the accuracy audit.
struct PermeabilityTensor {
    Mat2 K{{{0, 0}, {0, 0}}};
    Mat2 K_alt{{{0, 0}, {0, 0}}};
    double nu = 1.0;
    int n = 0;                    // cell grid resolution
    double consistency_gap = 0;   // max |K - K_alt| entrywise
    double symmetry_defect = 0;   // |K12 - K21| before symmetrization
};

/// Energy form: K_ij = nu * h * sum over face-difference pairs with both
/// faces unconstrained of dw^i dw^j (fluid-supported stencil entries),
/// symmetrized as (K + K^T)/2. Throws MaskMismatch if the two solutions do
/// not share a mask and viscosity.
Mat2 assemble_K_energy(const CellSolution& sol1, const CellSolution& sol2);

/// Mean-velocity form: (K_alt)_ij = component j of the mean velocity of the
/// e_i solution (the volume integral of w^i_j over Y_f).
Mat2 assemble_K_mean(const CellSolution& sol1, const CellSolution& sol2);

/// Both forms plus the consistency gap.
PermeabilityTensor assemble_permeability(const CellSolution& sol1,
                                         const CellSolution& sol2);

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::array<double, 2> eigenvalues_sym2x2(const Mat2& m);

struct CertifyReport {
    double eig_min = 0, eig_max = 0;
    double symmetry_defect = 0;
    double consistency_gap = 0;
};

/// Structural certification: throws SPDViolation if the minimum eigenvalue
/// is not strictly positive (signals an under-resolved or non-converged
/// cell solve).
CertifyReport certify(const PermeabilityTensor& K);

}  // namespace permahom
