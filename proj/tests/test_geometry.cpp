#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permahom/geometry.hpp"

using namespace permahom;

namespace {

ObstacleShape sphere(double r) {
    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = r;
    return s;
}

}  // namespace

TEST_CASE("sphere r=0.25 at n=4: exactly the 8 innermost voxels are solid") {
    // Voxel centers sit at +-0.125 and +-0.375 per axis; only the eight
    // (+-0.125,+-0.125,+-0.125) centers (norm ~0.2165) fall inside r=0.25.
    CellMask m = voxelize_cell(sphere(0.25), 4);
    CHECK(m.solid_count() == 8);
    CHECK(porosity(m) == doctest::Approx(0.875).epsilon(1e-15));
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) {
                const bool inner = (i == 1 || i == 2) && (j == 1 || j == 2) &&
                                   (k == 1 || k == 2);
                CHECK(m.is_fluid(i, j, k) == !inner);
            }
}

TEST_CASE("sphere solid fraction approaches the analytic volume") {
    const double exact = 4.0 / 3.0 * M_PI * 0.25 * 0.25 * 0.25;
    CellMask m = voxelize_cell(sphere(0.25), 32);
    const double frac = 1.0 - porosity(m);
    CHECK(std::abs(frac - exact) / exact < 0.02);
}

TEST_CASE("obstacle reaching the boundary is rejected") {
    CHECK_THROWS_AS(voxelize_cell(sphere(0.6), 8), ObstacleTouchesBoundary);
    // Inside T-bar subset of Y analytically but solid in the boundary layer.
    CHECK_THROWS_AS(voxelize_cell(sphere(0.45), 4), ObstacleTouchesBoundary);
}

TEST_CASE("bad voxel counts and parameters are rejected") {
    CHECK_THROWS_AS(voxelize_cell(sphere(0.25), 3), ValidationError);
    CHECK_THROWS_AS(voxelize_cell(sphere(-1.0), 8), ValidationError);
}

TEST_CASE("disconnected fluid is rejected") {
    // Boundary shell fluid, interior solid, one fluid pocket sealed inside.
    const int n = 6;
    CellMask m;
    m.n = n;
    m.fluid.assign(static_cast<std::size_t>(n) * n * n, 1);
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) m.fluid[m.idx(i, j, k)] = 0;
    m.fluid[m.idx(3, 3, 3)] = 1;
    CHECK_THROWS_AS(validate_cell_mask(m), DisconnectedFluid);
    m.fluid[m.idx(3, 3, 3)] = 0;
    CHECK_NOTHROW(validate_cell_mask(m));
}

TEST_CASE("mirror symmetry of the mask for a centered sphere") {
    const int n = 12;
    CellMask m = voxelize_cell(sphere(0.3), n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                CHECK(m.is_fluid(i, j, k) == m.is_fluid(n - 1 - i, j, k));
                CHECK(m.is_fluid(i, j, k) == m.is_fluid(i, n - 1 - j, k));
                CHECK(m.is_fluid(i, j, k) == m.is_fluid(i, j, n - 1 - k));
            }
}

TEST_CASE("refinement consistency: solid fraction drift is O(1/n)") {
    const double f8 = 1.0 - porosity(voxelize_cell(sphere(0.3), 8));
    const double f16 = 1.0 - porosity(voxelize_cell(sphere(0.3), 16));
    const double f32 = 1.0 - porosity(voxelize_cell(sphere(0.3), 32));
    const double d1 = std::abs(f16 - f8);
    const double d2 = std::abs(f32 - f16);
    const double C = 1.5 * 8.0 * d1;  // fitted on the first refinement
    CHECK(d2 <= C / 16.0);
}

TEST_CASE("superellipsoid and box voxelize and stay connected") {
    ObstacleShape s;
    s.kind = ShapeKind::box;
    s.half_extents = {0.3, 0.2, 0.25};
    CellMask mb = voxelize_cell(s, 10);
    CHECK(mb.solid_count() > 0);

    s.kind = ShapeKind::superellipsoid;
    s.exponent = 4.0;
    CellMask ms = voxelize_cell(s, 10);
    // Higher exponent bulges toward the bounding box: at least as much solid.
    CHECK(ms.solid_count() >= mb.solid_count() * 0.8);
}

TEST_CASE("thin domain tiling arithmetic") {
    ThinDomainSpec spec = ThinDomainSpec::make(1.0, 1.0, 0.25, 0.125);
    CHECK(spec.mx == 8);
    CHECK(spec.my == 8);
    CHECK(spec.mz == 2);

    CellMask cell = voxelize_cell(sphere(0.25), 8);
    PerforatedMask3D dom = build_thin_domain(spec, cell);
    CHECK(dom.nx == 64);
    CHECK(dom.ny == 64);
    CHECK(dom.nz == 16);
    CHECK(dom.solid_count() == cell.solid_count() * 8 * 8 * 2);
    CHECK(porosity(dom) == doctest::Approx(porosity(cell)).epsilon(1e-15));

    // Tiling periodicity of the labels.
    for (int k = 0; k < dom.nz; ++k)
        for (int j = 0; j < dom.ny; ++j)
            for (int i = 0; i < dom.nx - cell.n; ++i)
                CHECK(dom.is_fluid(i, j, k) == dom.is_fluid(i + cell.n, j, k));

    // No solid voxel on the outermost layer of Q_eps.
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            CHECK(dom.is_fluid(i, j, 0));
            CHECK(dom.is_fluid(i, j, dom.nz - 1));
        }
}

TEST_CASE("non-integer tiling is rejected") {
    CHECK_THROWS_AS(ThinDomainSpec::make(1.0, 1.0, 0.3, 0.125), NonIntegerTiling);
    // a_eps = epsilon tiles but violates a_eps << epsilon.
    CHECK_THROWS_AS(ThinDomainSpec::make(1.0, 1.0, 0.125, 0.125), ValidationError);
}

TEST_CASE("all-fluid cell tiles to the unperforated domain") {
    CellMask cell;
    cell.n = 4;
    cell.fluid.assign(64, 1);
    ThinDomainSpec spec = ThinDomainSpec::make(0.5, 0.5, 0.25, 0.125);
    PerforatedMask3D dom = build_thin_domain(spec, cell);
    CHECK(porosity(dom) == 1.0);
}

TEST_CASE("porosity of an all-fluid mask is one") {
    CellMask cell;
    cell.n = 4;
    cell.fluid.assign(64, 1);
    CHECK(porosity(cell) == 1.0);
}
