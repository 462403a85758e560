#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permahom/geometry.hpp"
#include "permahom/rng.hpp"
#include "permahom/stokes.hpp"

using namespace permahom;

namespace {

StokesSystem periodic_box(int n) {
    StaggeredGrid g;
    g.nx = g.ny = g.nz = n;
    g.hx = g.hy = g.hz = 1.0 / n;
    g.mode = BoundaryMode::periodic;
    return StokesSystem::all_fluid(g);
}

}  // namespace

TEST_CASE("periodic Laplacian annihilates constants") {
    StokesSystem sys = periodic_box(8);
    FaceField u = sys.make_face_field();
    for (int c = 0; c < 3; ++c) u.c[c].fill(2.5);
    FaceField out = sys.make_face_field();
    sys.apply_neg_laplacian(u, out);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < out.c[c].size(); ++i) CHECK(out.c[c][i] == 0.0);
}

TEST_CASE("single-mode field reproduces the discrete eigenvalue exactly") {
    const int n = 32;
    const double h = 1.0 / n;
    StokesSystem sys = periodic_box(n);
    FaceField u = sys.make_face_field();
    // u1 = sin(2 pi y1) sampled at x-face positions y1 = i*h.
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) u.c[0](i, j, k) = std::sin(2.0 * M_PI * i * h);
    FaceField out = sys.make_face_field();
    sys.apply_neg_laplacian(u, out);
    const double lambda = 2.0 / (h * h) * (1.0 - std::cos(2.0 * M_PI * h));
    // The discrete eigenvalue is within (2 pi h)^2/12 of (2 pi)^2 and the
    // operator hits it to roundoff.
    CHECK(std::abs(lambda - 4.0 * M_PI * M_PI) / (4.0 * M_PI * M_PI) <
          (2.0 * M_PI * h) * (2.0 * M_PI * h) / 12.0);
    double max_rel = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                max_rel = std::max(max_rel, std::abs(out.c[0](i, j, k) -
                                                     lambda * u.c[0](i, j, k)));
    CHECK(max_rel < 1e-10 * lambda);
}

TEST_CASE("an isolated solid voxel produces exactly six Dirichlet rows") {
    const int n = 6;
    CellMask mask;
    mask.n = n;
    mask.fluid.assign(static_cast<std::size_t>(n) * n * n, 1);
    mask.fluid[mask.idx(3, 3, 3)] = 0;
    StokesSystem sys = StokesSystem::from_cell_mask(mask);

    int fixed = 0;
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) fixed += sys.face_is_fixed(c, i, j, k);
    CHECK(fixed == 6);
    CHECK(sys.face_is_fixed(0, 3, 3, 3));
    CHECK(sys.face_is_fixed(0, 4, 3, 3));
    CHECK(sys.face_is_fixed(1, 3, 3, 3));
    CHECK(sys.face_is_fixed(1, 3, 4, 3));
    CHECK(sys.face_is_fixed(2, 3, 3, 3));
    CHECK(sys.face_is_fixed(2, 3, 3, 4));

    // Identity rows on those faces.
    FaceField u = sys.make_face_field();
    u.c[0](3, 3, 3) = 7.0;
    FaceField out = sys.make_face_field();
    sys.apply_neg_laplacian(u, out);
    CHECK(out.c[0](3, 3, 3) == 7.0);
}

TEST_CASE("gradient of a constant is zero and divergence of a constant is zero") {
    StokesSystem sys = periodic_box(6);
    Array3 p = sys.make_cell_array();
    p.fill(3.14);
    FaceField g = sys.make_face_field();
    sys.apply_gradient(p, g);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.c[c].size(); ++i) CHECK(g.c[c][i] == 0.0);

    FaceField u = sys.make_face_field();
    for (int c = 0; c < 3; ++c) u.c[c].fill(1.25);
    Array3 d = sys.make_cell_array();
    sys.apply_divergence(u, d);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == 0.0);
}

TEST_CASE("gradient and divergence are negative adjoints over fluid unknowns") {
    // Random p, random w on a masked n=8 cell, periodic and walls modes.
    auto check_adjoint = [](const StokesSystem& sys) {
        DeterministicRng rng(42);
        Array3 p = sys.make_cell_array();
        for (int k = 0; k < p.nz(); ++k)
            for (int j = 0; j < p.ny(); ++j)
                for (int i = 0; i < p.nx(); ++i)
                    p(i, j, k) = sys.cell_is_fluid(i, j, k) ? rng.uniform(-1, 1) : 0.0;
        FaceField w = sys.make_face_field();
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < w.c[c].size(); ++i)
                w.c[c][i] = rng.uniform(-1, 1);
        sys.mask_faces(w);

        FaceField gp = sys.make_face_field();
        sys.apply_gradient(p, gp);
        Array3 dw = sys.make_cell_array();
        sys.apply_divergence(w, dw);

        const double lhs = StokesSystem::dot(gp, w);
        const double rhs = -StokesSystem::dot(p, dw);
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(scale, 1.0));
    };

    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = 0.3;
    CellMask mask = voxelize_cell(s, 8);
    check_adjoint(StokesSystem::from_cell_mask(mask));

    ThinDomainSpec spec = ThinDomainSpec::make(0.5, 0.5, 0.25, 0.125);
    PerforatedMask3D dom = build_thin_domain(spec, voxelize_cell(s, 4));
    check_adjoint(StokesSystem::from_perforated(dom));
}

TEST_CASE("walls mode constrains exactly the boundary normal faces") {
    StaggeredGrid g;
    g.nx = 4;
    g.ny = 5;
    g.nz = 3;
    g.hx = g.hy = g.hz = 0.1;
    g.mode = BoundaryMode::no_slip_walls;
    StokesSystem sys = StokesSystem::all_fluid(g);

    for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k < g.nz; ++k) {
            CHECK(sys.face_is_fixed(0, 0, j, k));
            CHECK(sys.face_is_fixed(0, g.nx, j, k));
            CHECK(!sys.face_is_fixed(0, 1, j, k));
        }
    // Tangential faces near walls stay unconstrained (handled by ghosts).
    CHECK(!sys.face_is_fixed(0, 1, 0, 0));
}
