#pragma once

#include <optional>
#include <string>
#include <vector>

#include "permahom/array3.hpp"
#include "permahom/errors.hpp"
#include "permahom/permeability.hpp"

namespace permahom {

enum class ForceKind { constant, gradient, vortex, manufactured };

ForceKind force_kind_from_string(const std::string& s);
std::string to_string(ForceKind k);

/// Closed-form body force descriptor f'(x') (no x3 dependence).
///
/// Kinds and params:
///   constant       fx fy
///   gradient       A [mx my]   f' = grad phi, phi = A cos(mx pi x/Lx) cos(my pi y/Ly)
///                              (defaults mx=1, my=0). Both conservative kinds are
///                              realized on Darcy grids as discrete gradients of the
///                              sampled potential, so they are absorbed by the
///                              pressure exactly.
///   vortex         A [mx my]   f' = (d2 chi, -d1 chi), chi = A sin(mx pi x/Lx) sin(my pi y/Ly)
///                              (defaults mx=my=1); non-conservative, drives a flow.
///   manufactured   [Au Ap]     f' = grad p* + K^{-1} U* for the built-in
///                              manufactured Darcy solution; requires K.
struct ForceSpec {
    ForceKind kind = ForceKind::constant;
    std::vector<double> params;

    void validate() const;
    /// Pointwise analytic value (manufactured needs K).
    std::array<double, 2> eval(double x, double y, double Lx, double Ly,
                               const Mat2* K = nullptr) const;
};

/// Built-in manufactured solution on (0,Lx)x(0,Ly):
///   psi = Au sin^2(pi x/Lx) sin^2(pi y/Ly),  U* = (d2 psi, -d1 psi)
///   p*  = Ap cos(pi x/Lx) cos(pi y/Ly),      f' = grad p* + K^{-1} U*
/// U* is divergence-free with U*.n = 0 on the boundary.
struct ManufacturedDarcy {
    Mat2 K;
    double Lx = 1, Ly = 1;
    double amp_u = 1, amp_p = 1;

    std::array<double, 2> exact_velocity(double x, double y) const;
    double exact_pressure(double x, double y) const;
    std::array<double, 2> force(double x, double y) const;
};

/// Body force sampled everywhere the nine-point scheme needs it: cell
/// centers plus both components on x- and y-faces.
struct BodyForce2D {
    int gx = 0, gy = 0;
    double Lx = 0, Ly = 0, hx = 0, hy = 0;
    Array2 fx_c, fy_c;    // centers, gx x gy
    Array2 fx_xf, fy_xf;  // x-faces, (gx+1) x gy
    Array2 fx_yf, fy_yf;  // y-faces, gx x (gy+1)
};

BodyForce2D sample_force(const ForceSpec& spec, int gx, int gy, double Lx, double Ly,
                         const Mat2* K = nullptr);

struct DarcySolution {
    int gx = 0, gy = 0;
    double Lx = 0, Ly = 0, hx = 0, hy = 0;
    Array2 p;        // cell-centered, zero mean over omega
    Array2 Ux, Uy;   // K(f' - grad p) at cell centers; U3 is identically zero
    double flux_residual = 0;  // max cell imbalance of the face fluxes
    int iters = 0;
};

/// Finite-volume solve of div(K(f' - grad p)) = 0 on the rectangle with the
/// normal flux K(f' - grad p).n = 0 built into the boundary faces. The
/// cross term K12 uses four-neighbor tangential averaging (nine-point
/// stencil); the singular pure-Neumann system is solved by CG projected to
/// zero mean. Throws SPDViolation for a non-SPD K and NotConverged when the
/// iteration cap is exhausted.
DarcySolution solve_darcy(const PermeabilityTensor& K, const BodyForce2D& f, int gx,
                          int gy, double rtol = 1e-12, int max_iters = 0,
                          const Array2* initial_guess = nullptr);
DarcySolution solve_darcy(const Mat2& K, const BodyForce2D& f, int gx, int gy,
                          double rtol = 1e-12, int max_iters = 0,
                          const Array2* initial_guess = nullptr);

/// U' = K(f' - grad p) at cell centers with mirrored centered differences.
void reconstruct_velocity(const Mat2& K, const BodyForce2D& f, const Array2& p,
                          Array2& Ux, Array2& Uy);

}  // namespace permahom
