#pragma once

#include <array>

#include "permahom/geometry.hpp"
#include "permahom/stokes.hpp"

namespace permahom {

/// Converged periodic cell solution (w^i, pi^i) for forcing e_i.
struct CellSolution {
    CellMask mask;
    int forcing_index = 1;  // 1 or 2
    double nu = 1.0;
    StaggeredGrid grid;
    FaceField w;
    Array3 pi;
    double mom_residual = 0;
    double div_residual = 0;
    int outer_iters = 0;
    long long inner_iters = 0;
};

/// Solve the periodic local Stokes problem on the voxelized fluid cell for
/// the unit forcing e_i, i in {1,2}. The mask must contain an obstacle;
/// with T empty the problem has no solution (testing with e_i gives
/// 0 = |Y| != 0), so EmptyObstacle is thrown.
CellSolution solve_cell_problem(const CellMask& mask, int forcing_index,
                                const SolverConfig& cfg);

/// Midpoint-rule approximation of the volume integral of w over Y_f with w
/// extended by zero into the obstacle: component j = h^3 * sum of face
/// values of w_j.
std::array<double, 3> solution_mean_velocity(const CellSolution& sol);

}  // namespace permahom
