#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "permahom/errors.hpp"

namespace permahom {

enum class ShapeKind { sphere, box, superellipsoid };

ShapeKind shape_kind_from_string(const std::string& s);
std::string to_string(ShapeKind k);

/// Parametric obstacle inside the reference cell Y = (-1/2,1/2)^3.
/// The closed obstacle must stay strictly inside Y.
struct ObstacleShape {
    ShapeKind kind = ShapeKind::sphere;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;                         // sphere
    std::array<double, 3> half_extents{0, 0, 0}; // box, superellipsoid
    double exponent = 2.0;                       // superellipsoid only

    /// True if the point (Y coordinates) lies inside the open obstacle.
    bool contains(double x, double y, double z) const;

    /// Throws ObstacleTouchesBoundary / ValidationError on bad parameters.
    void validate() const;

    /// Half-width of the axis-aligned bounding box along each axis.
    std::array<double, 3> extent() const;
};

/// Voxelized reference cell: labels[v] true = fluid (Y_f), false = solid (T).
struct CellMask {
    int n = 0;                    // voxels per axis
    std::vector<std::uint8_t> fluid;  // n^3, x fastest

    double h() const { return 1.0 / n; }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n + j) * n + i;
    }
    bool is_fluid(int i, int j, int k) const { return fluid[idx(i, j, k)] != 0; }
    std::size_t solid_count() const;
    std::size_t fluid_count() const;
    bool has_obstacle() const { return solid_count() > 0; }
    /// Voxel center coordinate along one axis, in (-1/2, 1/2).
    double center_coord(int i) const { return -0.5 + (i + 0.5) * h(); }
};

/// Parameters of the thin perforated box Q_eps = (0,Lx)x(0,Ly)x(0,eps),
/// tiled exactly by microcells of side a_eps.
struct ThinDomainSpec {
    double Lx = 0, Ly = 0, epsilon = 0, a_eps = 0;
    int mx = 0, my = 0, mz = 0;  // derived cell counts

    /// Validates positivity, exact tiling and a_eps < epsilon.
    static ThinDomainSpec make(double Lx, double Ly, double epsilon, double a_eps);
};

/// Voxelized thin perforated domain: the cell mask tiled mx x my x mz times.
struct PerforatedMask3D {
    ThinDomainSpec spec;
    int n_c = 0;  // voxels per microcell per axis
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::uint8_t> fluid;  // x fastest

    double h() const { return spec.a_eps / n_c; }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    bool is_fluid(int i, int j, int k) const { return fluid[idx(i, j, k)] != 0; }
    std::size_t solid_count() const;
    /// Physical coordinate of a voxel center along axis 0/1/2.
    double center_coord(int axis, int i) const { return (i + 0.5) * h(); (void)axis; }
};

/// Voxelize an obstacle: a voxel is solid iff its center lies inside the shape.
/// Throws ObstacleTouchesBoundary if a boundary-layer voxel comes out solid,
/// DisconnectedFluid if the fluid voxels are not face-connected under
/// periodic wrap.
CellMask voxelize_cell(const ObstacleShape& shape, int n);

/// Invariant check for hand-built masks: boundary voxel layers fluid, fluid
/// voxels face-connected under periodic wrap. voxelize_cell applies this.
void validate_cell_mask(const CellMask& mask);

/// Tile the cell mask over the thin domain. cell.n gives the voxel count per
/// microcell. Throws NonIntegerTiling via ThinDomainSpec::make.
PerforatedMask3D build_thin_domain(const ThinDomainSpec& spec, const CellMask& cell);

double porosity(const CellMask& mask);
double porosity(const PerforatedMask3D& mask);

}  // namespace permahom
