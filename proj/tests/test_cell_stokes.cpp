#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permahom/cell_stokes.hpp"
#include "support/dense_oracle.hpp"

using namespace permahom;

namespace {

CellMask sphere_mask(double r, int n) {
    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = r;
    return voxelize_cell(s, n);
}

double max_face_diff(const FaceField& a, const FaceField& b) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.c[c].size(); ++i)
            m = std::max(m, std::abs(a.c[c][i] - b.c[c][i]));
    return m;
}

}  // namespace

TEST_CASE("empty obstacle is rejected") {
    CellMask mask;
    mask.n = 4;
    mask.fluid.assign(64, 1);
    SolverConfig cfg;
    CHECK_THROWS_AS(solve_cell_problem(mask, 1, cfg), EmptyObstacle);
}

TEST_CASE("iterative solve matches the dense KKT factorization at n=6") {
    CellMask mask = sphere_mask(0.25, 6);
    SolverConfig cfg;
    cfg.tol_mom = 1e-10;
    cfg.tol_div = 1e-10;
    CellSolution sol = solve_cell_problem(mask, 1, cfg);

    StokesSystem sys = StokesSystem::from_cell_mask(mask);
    FaceField rhs = sys.make_face_field();
    rhs.c[0].fill(1.0);
    sys.mask_faces(rhs);
    test::DenseStokesSolution ref = test::dense_stokes_solve(sys, rhs, cfg.nu);
    sys.project_zero_mean(ref.p);

    CHECK(max_face_diff(sol.w, ref.u) < 1e-8);
    double pdiff = 0.0;
    for (std::size_t i = 0; i < sol.pi.size(); ++i)
        pdiff = std::max(pdiff, std::abs(sol.pi[i] - ref.p[i]));
    CHECK(pdiff < 1e-8);
    CHECK(std::abs(ref.lambda) < 1e-12);

    // Mean velocity agrees with the oracle quadrature.
    const auto mean = solution_mean_velocity(sol);
    double ref_mean = 0.0;
    const double w3 = sol.grid.cell_volume();
    for (std::size_t i = 0; i < ref.u.c[0].size(); ++i) ref_mean += ref.u.c[0][i];
    ref_mean *= w3;
    CHECK(std::abs(mean[0] - ref_mean) < 1e-10);
}

TEST_CASE("solver meets its residual contract") {
    CellMask mask = sphere_mask(0.25, 8);
    SolverConfig cfg;
    CellSolution sol = solve_cell_problem(mask, 1, cfg);
    CHECK(sol.mom_residual <= cfg.tol_mom);
    CHECK(sol.div_residual <= cfg.tol_div);

    // Zero-mean pressure over fluid cells.
    double mean = 0.0;
    std::size_t nf = 0;
    for (int k = 0; k < mask.n; ++k)
        for (int j = 0; j < mask.n; ++j)
            for (int i = 0; i < mask.n; ++i)
                if (mask.is_fluid(i, j, k)) {
                    mean += sol.pi(i, j, k);
                    ++nf;
                }
    CHECK(std::abs(mean / nf) < 1e-12);
}

TEST_CASE("swap symmetry: w^2 is the axis-swapped image of w^1") {
    CellMask mask = sphere_mask(0.25, 8);
    SolverConfig cfg;
    CellSolution s1 = solve_cell_problem(mask, 1, cfg);
    CellSolution s2 = solve_cell_problem(mask, 2, cfg);
    const int n = mask.n;
    double m = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                // (y1,y2) swap maps u1-faces to u2-faces and u3 to itself.
                m = std::max(m, std::abs(s2.w.c[1](j, i, k) - s1.w.c[0](i, j, k)));
                m = std::max(m, std::abs(s2.w.c[0](j, i, k) - s1.w.c[1](i, j, k)));
                m = std::max(m, std::abs(s2.w.c[2](j, i, k) - s1.w.c[2](i, j, k)));
            }
    CHECK(m < 50 * cfg.tol_mom);
}

TEST_CASE("vertical mean velocity vanishes for a z-symmetric obstacle") {
    CellMask mask = sphere_mask(0.25, 8);
    SolverConfig cfg;
    CellSolution sol = solve_cell_problem(mask, 1, cfg);
    const auto mean = solution_mean_velocity(sol);
    CHECK(std::abs(mean[2]) <= 10 * cfg.tol_mom);
    CHECK(mean[0] > 0.0);
}

TEST_CASE("energy identity: nu <Dw,Dw> equals the forced mean velocity") {
    CellMask mask = sphere_mask(0.3, 8);
    SolverConfig cfg;
    CellSolution sol = solve_cell_problem(mask, 1, cfg);
    StokesSystem sys = StokesSystem::from_cell_mask(mask);
    const double energy = cfg.nu * sys.dirichlet_energy(sol.w, sol.w);
    const auto mean = solution_mean_velocity(sol);
    CHECK(std::abs(energy - mean[0]) <= 10 * cfg.tol_mom * std::max(1.0, energy));
}

TEST_CASE("doubling the viscosity halves w and keeps pi") {
    CellMask mask = sphere_mask(0.25, 6);
    SolverConfig cfg;
    cfg.tol_mom = 1e-10;
    cfg.tol_div = 1e-10;
    CellSolution a = solve_cell_problem(mask, 1, cfg);
    cfg.nu = 2.0;
    CellSolution b = solve_cell_problem(mask, 1, cfg);
    double mw = 0.0, mp = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.w.c[c].size(); ++i)
            mw = std::max(mw, std::abs(2.0 * b.w.c[c][i] - a.w.c[c][i]));
    for (std::size_t i = 0; i < a.pi.size(); ++i)
        mp = std::max(mp, std::abs(b.pi[i] - a.pi[i]));
    CHECK(mw < 1e-8);
    CHECK(mp < 1e-7);
}

TEST_CASE("translation equivariance: shifting the obstacle shifts the solution") {
    const int n = 8;
    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = 0.25;
    CellMask m0 = voxelize_cell(s, n);
    s.center = {1.0 / n, 0.0, 0.0};
    CellMask m1 = voxelize_cell(s, n);

    // The voxelization itself shifts exactly.
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                CHECK(m1.is_fluid((i + 1) % n, j, k) == m0.is_fluid(i, j, k));

    SolverConfig cfg;
    cfg.tol_mom = 1e-10;
    cfg.tol_div = 1e-10;
    CellSolution a = solve_cell_problem(m0, 1, cfg);
    CellSolution b = solve_cell_problem(m1, 1, cfg);
    double mw = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    mw = std::max(mw, std::abs(b.w.c[c]((i + 1) % n, j, k) -
                                               a.w.c[c](i, j, k)));
    CHECK(mw < 1e-8);
}

TEST_CASE("exhausted iteration caps raise NotConverged with a history") {
    CellMask mask = sphere_mask(0.25, 8);
    SolverConfig cfg;
    cfg.tol_mom = 1e-12;
    cfg.tol_div = 1e-14;
    cfg.max_outer = 2;
    cfg.max_inner = 3;
    try {
        solve_cell_problem(mask, 1, cfg);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(!e.residual_history.empty());
    }
}

TEST_CASE("fully blocked cells: every face constrained, solver returns zero") {
    const int n = 4;
    SolverConfig cfg;

    // Obstacle fills the whole cell: no fluid cells at all.
    CellMask solid;
    solid.n = n;
    solid.fluid.assign(static_cast<std::size_t>(n) * n * n, 0);
    CellSolution a = solve_cell_problem(solid, 1, cfg);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.w.c[c].size(); ++i) CHECK(a.w.c[c][i] == 0.0);
    CHECK(a.mom_residual == 0.0);

    // A single isolated fluid voxel: all six of its faces touch solid.
    CellMask one = solid;
    one.fluid[one.idx(1, 1, 1)] = 1;
    CellSolution b = solve_cell_problem(one, 1, cfg);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < b.w.c[c].size(); ++i) CHECK(b.w.c[c][i] == 0.0);
    CHECK(b.mom_residual == 0.0);
    CHECK(b.div_residual == 0.0);
}
