#pragma once

#include <array>
#include <vector>

#include "permahom/array3.hpp"
#include "permahom/geometry.hpp"

namespace permahom {

/// Microcell index of a point given in dilated coordinates (x', z3): the
/// unique k with the point inside the rescaled cell, i.e. the nearest
/// integer of (x1/a, x2/a, eps*z3/a) per component. Throws OnCellBoundary
/// when a coordinate sits within 1e-12 of a cell face (voxel centers never
/// do).
std::array<long long, 3> kappa(const std::array<double, 3>& point, double a_eps,
                               double eps);

/// Cell-centered samples on the dilated thin domain: horizontal spacing
/// a/n_c, vertical spacing (a/eps)/n_c, so each microcell maps to an
/// n_c^3 voxel block.
struct DilatedField {
    ThinDomainSpec spec;
    int n_c = 0;
    std::vector<Array3> comp;  // ncomp arrays of dims (mx*n_c, my*n_c, mz*n_c)

    int ncomp() const { return static_cast<int>(comp.size()); }
    double hx() const { return spec.a_eps / n_c; }
    double hy() const { return spec.a_eps / n_c; }
    double hz() const { return (spec.a_eps / spec.epsilon) / n_c; }
    /// Measure of one voxel in (x', z3) coordinates.
    double voxel_measure() const { return hx() * hy() * hz(); }

    static DilatedField zeros(const ThinDomainSpec& spec, int n_c, int ncomp = 1);
    void check_aligned() const;  // throws MisalignedGrid
};

/// Samples indexed by (microcell k, reference-cell voxel r); block-major
/// storage, cells lexicographic then voxels lexicographic.
struct UnfoldedField {
    ThinDomainSpec spec;
    int n_c = 0;
    std::vector<std::vector<double>> comp;

    int ncomp() const { return static_cast<int>(comp.size()); }
    std::size_t cells() const {
        return static_cast<std::size_t>(spec.mx) * spec.my * spec.mz;
    }
    std::size_t block() const {
        return static_cast<std::size_t>(n_c) * n_c * n_c;
    }
    std::size_t idx(int ci, int cj, int ck, int ri, int rj, int rk) const {
        const std::size_t cell =
            (static_cast<std::size_t>(ck) * spec.my + cj) * spec.mx + ci;
        const std::size_t vox = (static_cast<std::size_t>(rk) * n_c + rj) * n_c + ri;
        return cell * block() + vox;
    }
};

/// Block copy onto (cell, reference voxel) indexing; exact, no interpolation.
UnfoldedField unfold(const DilatedField& field);

/// Inverse block copy; fold(unfold(f)) == f exactly.
DilatedField fold(const UnfoldedField& field);

struct UnfoldReport {
    double defect_a = 0;  // L2 norm identity
    double defect_b = 0;  // horizontal gradient identity (factor a)
    double defect_c = 0;  // vertical derivative identity (factor a/eps)
};

/// Verify the three norm identities of the unfolding operator to roundoff.
/// Discrete derivatives are forward differences; pairs crossing microcell
/// boundaries are excluded on both sides identically.
UnfoldReport verify_norm_identities(const DilatedField& field);

}  // namespace permahom
