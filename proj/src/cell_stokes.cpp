#include "permahom/cell_stokes.hpp"

namespace permahom {

CellSolution solve_cell_problem(const CellMask& mask, int forcing_index,
                                const SolverConfig& cfg) {
    if (forcing_index != 1 && forcing_index != 2)
        throw ValidationError("forcing index must be 1 or 2");
    if (!mask.has_obstacle())
        throw EmptyObstacle(
            "the cell problem needs an obstacle: with T empty the constant test "
            "function makes the forcing incompatible");

    StokesSystem sys = StokesSystem::from_cell_mask(mask);
    FaceField rhs = sys.make_face_field();
    rhs.c[forcing_index - 1].fill(1.0);
    sys.mask_faces(rhs);

    StokesResult r = solve_stokes(sys, rhs, cfg);

    CellSolution sol;
    sol.mask = mask;
    sol.forcing_index = forcing_index;
    sol.nu = cfg.nu;
    sol.grid = sys.grid();
    sol.w = std::move(r.u);
    sol.pi = std::move(r.p);
    sol.mom_residual = r.mom_residual;
    sol.div_residual = r.div_residual;
    sol.outer_iters = r.outer_iters;
    sol.inner_iters = r.inner_iters;
    return sol;
}

std::array<double, 3> solution_mean_velocity(const CellSolution& sol) {
    const double w3 = sol.grid.cell_volume();
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        const Array3& a = sol.w.c[c];
        for (std::size_t id = 0; id < a.size(); ++id) s += a[id];
        mean[c] = w3 * s;
    }
    return mean;
}

}  // namespace permahom
