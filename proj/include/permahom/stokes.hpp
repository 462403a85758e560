#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "permahom/array3.hpp"
#include "permahom/errors.hpp"
#include "permahom/geometry.hpp"

namespace permahom {

/// periodic: wrap on all axes (cell problems). no_slip_walls: the exterior
/// counts as solid on all six sides (thin perforated box). channel: periodic
/// horizontally with no-slip plates in z (obstacle-free flow oracles).
enum class BoundaryMode { periodic, no_slip_walls, channel };

/// MAC staggered grid: pressure at cell centers, velocity component c on
/// faces normal to axis c. Under periodic wrap the face at the high end of
/// its own axis is the face at index 0 (one shared unknown); along a walled
/// axis the normal-face count is n+1.
struct StaggeredGrid {
    int nx = 0, ny = 0, nz = 0;
    double hx = 0, hy = 0, hz = 0;
    BoundaryMode mode = BoundaryMode::periodic;

    bool periodic_axis(int axis) const {
        switch (mode) {
            case BoundaryMode::periodic: return true;
            case BoundaryMode::no_slip_walls: return false;
            case BoundaryMode::channel: return axis != 2;
        }
        return true;
    }
    int cells(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    double spacing(int axis) const { return axis == 0 ? hx : (axis == 1 ? hy : hz); }
    /// Face-array extent of component c along axis a.
    int face_dim(int c, int a) const {
        return cells(a) + ((a == c && !periodic_axis(a)) ? 1 : 0);
    }
    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    double cell_volume() const { return hx * hy * hz; }
};

/// Face-centered velocity (one Array3 per component).
struct FaceField {
    std::array<Array3, 3> c;

    static FaceField zeros(const StaggeredGrid& g) {
        FaceField f;
        for (int comp = 0; comp < 3; ++comp)
            f.c[comp] = Array3(g.face_dim(comp, 0), g.face_dim(comp, 1), g.face_dim(comp, 2));
        return f;
    }
};

struct SolverConfig {
    double tol_mom = 1e-8;  ///< relative momentum residual target
    double tol_div = 1e-8;  ///< absolute divergence target (max norm)
    int max_outer = 500;    ///< Uzawa/Schur iteration cap
    int max_inner = 2000;   ///< inner CG cap per viscous solve
    double nu = 1.0;        ///< viscosity

    void validate() const {
        if (!(tol_mom > 0) || !(tol_div > 0))
            throw ValidationError("solver tolerances must be > 0");
        if (max_outer < 1 || max_inner < 1)
            throw ValidationError("solver iteration caps must be >= 1");
        if (!(nu > 0)) throw ValidationError("solver.nu must be > 0");
    }
};

/// Discrete Stokes operators on a masked staggered grid.
///
/// A velocity face is constrained to zero when either of its two adjacent
/// cells is solid; with walls, the exterior counts as solid, so normal faces
/// on the box boundary are constrained and tangential stencil neighbors
/// beyond a wall enter as reflection ghosts (-u).
class StokesSystem {
public:
    StokesSystem(const StaggeredGrid& grid, std::vector<std::uint8_t> cell_fluid);

    static StokesSystem from_cell_mask(const CellMask& mask);
    static StokesSystem from_perforated(const PerforatedMask3D& mask,
                                        BoundaryMode mode = BoundaryMode::no_slip_walls);
    /// All-fluid system (used for obstacle-free channels).
    static StokesSystem all_fluid(const StaggeredGrid& grid);

    const StaggeredGrid& grid() const { return grid_; }
    bool cell_is_fluid(int i, int j, int k) const {
        return cell_fluid_[cell_idx(i, j, k)] != 0;
    }
    bool face_is_fixed(int comp, int i, int j, int k) const {
        return fixed_[comp][face_idx(comp, i, j, k)] != 0;
    }
    std::size_t fluid_cell_count() const { return n_fluid_cells_; }
    std::size_t unconstrained_face_count() const { return n_free_faces_; }
    const std::vector<std::uint8_t>& fixed_mask(int comp) const { return fixed_[comp]; }
    const std::vector<std::uint8_t>& cell_fluid_mask() const { return cell_fluid_; }

    /// out = -Laplacian(u) per component (7-point), identity rows on
    /// constrained faces.
    void apply_neg_laplacian(const FaceField& u, FaceField& out) const;

    /// out = grad p on unconstrained faces, 0 on constrained ones.
    void apply_gradient(const Array3& p, FaceField& out) const;

    /// out = div u on fluid cells, 0 on solid cells.
    void apply_divergence(const FaceField& u, Array3& out) const;

    /// Zero all constrained-face entries.
    void mask_faces(FaceField& u) const;

    /// Remove the mean over fluid cells.
    void project_zero_mean(Array3& p) const;

    double max_abs_divergence(const FaceField& u) const;

    /// Full discrete Dirichlet energy h^3 * <(-Lap)u, v> (wall ghosts
    /// included); the discrete realization of the integral of Du:Dv.
    double dirichlet_energy(const FaceField& u, const FaceField& v) const;

    // Deterministic reductions (fixed lexicographic order).
    static double dot(const Array3& a, const Array3& b);
    static double dot(const FaceField& a, const FaceField& b);

    Array3 make_cell_array() const { return Array3(grid_.nx, grid_.ny, grid_.nz); }
    FaceField make_face_field() const { return FaceField::zeros(grid_); }

private:
    std::size_t cell_idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * grid_.ny + j) * grid_.nx + i;
    }
    std::size_t face_idx(int comp, int i, int j, int k) const {
        const int dx = grid_.face_dim(comp, 0);
        const int dy = grid_.face_dim(comp, 1);
        return (static_cast<std::size_t>(k) * dy + j) * dx + i;
    }
    bool solid_at(int i, int j, int k) const;  // periodic wrap / exterior-as-solid

    StaggeredGrid grid_;
    std::vector<std::uint8_t> cell_fluid_;
    std::array<std::vector<std::uint8_t>, 3> fixed_;
    std::size_t n_fluid_cells_ = 0;
    std::size_t n_free_faces_ = 0;
};

struct StokesResult {
    FaceField u;
    Array3 p;
    double mom_residual = 0;  ///< relative, measured on the original operators
    double div_residual = 0;  ///< max-norm of discrete divergence
    int outer_iters = 0;
    long long inner_iters = 0;
    bool converged = false;
    std::vector<double> div_history;
};

/// Schur-complement (Uzawa) solve of the discrete Stokes system
///   nu*(-Lap) u + grad p = rhs,  div u = 0,  mean(p over fluid cells) = 0.
/// Convergence is declared on the original momentum/divergence residuals.
/// Throws NotConverged when the caps are exhausted.
StokesResult solve_stokes(const StokesSystem& sys, const FaceField& rhs,
                          const SolverConfig& cfg);

}  // namespace permahom
