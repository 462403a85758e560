// Acceptance suite: every gate below runs end-to-end at desk scale and
// prints one PASS/FAIL line. The build is green only when all ten pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "permahom/cell_stokes.hpp"
#include "permahom/config.hpp"
#include "permahom/dns_thin.hpp"
#include "permahom/io.hpp"
#include "permahom/permeability.hpp"
#include "permahom/pipeline.hpp"
#include "permahom/rng.hpp"
#include "permahom/unfolding.hpp"
#include "support/dense_oracle.hpp"

using namespace permahom;
namespace fs = std::filesystem;

namespace {

int g_pass = 0, g_fail = 0;

double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void record(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << "  |  " << detail;
    std::cout << "\n" << std::flush;
    (ok ? g_pass : g_fail)++;
}

std::string f2s(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

CellMask sphere_mask(double r, int n) {
    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = r;
    return voxelize_cell(s, n);
}

struct CellPair {
    CellSolution s1, s2;
    PermeabilityTensor K;
};

CellPair solve_K(int n, double nu, double tol) {
    SolverConfig cfg;
    cfg.tol_mom = tol;
    cfg.tol_div = tol;
    cfg.nu = nu;
    cfg.max_outer = 2000;
    cfg.max_inner = 20000;
    CellPair p{solve_cell_problem(sphere_mask(0.25, n), 1, cfg),
               solve_cell_problem(sphere_mask(0.25, n), 2, cfg), {}};
    p.K = assemble_permeability(p.s1, p.s2);
    return p;
}

// ---------------------------------------------------------------------------
// A1: iterative cell solve vs dense KKT factorization at n=6
// ---------------------------------------------------------------------------
void criterion_1() {
    const double t0 = now();
    CellMask mask = sphere_mask(0.25, 6);
    SolverConfig cfg;  // stated tolerances: 1e-8
    CellSolution sol = solve_cell_problem(mask, 1, cfg);

    StokesSystem sys = StokesSystem::from_cell_mask(mask);
    FaceField rhs = sys.make_face_field();
    rhs.c[0].fill(1.0);
    sys.mask_faces(rhs);
    test::DenseStokesSolution ref = test::dense_stokes_solve(sys, rhs, cfg.nu);
    sys.project_zero_mean(ref.p);

    double dw = 0.0, dp = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < sol.w.c[c].size(); ++i)
            dw = std::max(dw, std::abs(sol.w.c[c][i] - ref.u.c[c][i]));
    for (std::size_t i = 0; i < sol.pi.size(); ++i)
        dp = std::max(dp, std::abs(sol.pi[i] - ref.p[i]));
    const double secs = now() - t0;
    record("A1 dense-oracle equivalence (n=6 sphere)",
           dw < 1e-8 && dp < 1e-8 && secs < 10.0,
           "max|dw|=" + f2s(dw) + " max|dpi|=" + f2s(dp) + " t=" + f2s(secs) + "s");
}

// ---------------------------------------------------------------------------
// A2/A3/A4: permeability identity, symmetry, nu-scaling
// ---------------------------------------------------------------------------
std::map<int, CellPair> g_pairs;  // shared across criteria 2-4 and 8

void criterion_2() {
    const double tol = 1e-10;
    for (int n : {8, 16, 32}) g_pairs.emplace(n, solve_K(n, 1.0, tol));

    bool ok = true;
    std::string detail;
    double gap8 = g_pairs.at(8).K.consistency_gap;
    double gap16 = g_pairs.at(16).K.consistency_gap;
    double gap32 = g_pairs.at(32).K.consistency_gap;
    // C fitted on the coarsest level (25% slack: the decay is first order,
    // not exactly proportional); the ratio gates below carry the teeth.
    const double C = 1.25 * gap8 / (1.0 / 8.0 + tol);
    ok = ok && gap16 <= C * (1.0 / 16.0 + tol) && gap32 <= C * (1.0 / 32.0 + tol);
    ok = ok && gap8 / gap16 >= 1.5 && gap16 / gap32 >= 1.5;
    for (int n : {8, 16, 32}) {
        const PermeabilityTensor& K = g_pairs.at(n).K;
        ok = ok && K.symmetry_defect <= 1e-10 * std::abs(K.K[0][0]);
        const auto eig = eigenvalues_sym2x2(K.K);
        ok = ok && eig[0] > 0.0;
    }
    detail = "gaps " + f2s(gap8) + " -> " + f2s(gap16) + " -> " + f2s(gap32) +
             " (ratios " + f2s(gap8 / gap16) + ", " + f2s(gap16 / gap32) + ")";
    record("A2 permeability identity gap shrinks under refinement", ok, detail);
}

void criterion_3() {
    const PermeabilityTensor& K = g_pairs.at(16).K;
    const double rel_diag = std::abs(K.K[0][0] - K.K[1][1]) / K.K[0][0];
    const double rel_off = std::abs(K.K[0][1]) / K.K[0][0];
    record("A3 sphere symmetry of K at n=16", rel_diag <= 1e-6 && rel_off <= 1e-6,
           "|K11-K22|/K11=" + f2s(rel_diag) + " |K12|/K11=" + f2s(rel_off));
}

void criterion_4() {
    const PermeabilityTensor& K1 = g_pairs.at(8).K;
    CellPair p2 = solve_K(8, 2.0, 1e-10);
    double rel = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            rel = std::max(rel, std::abs(p2.K.K[i][j] - 0.5 * K1.K[i][j]) /
                                    std::abs(K1.K[0][0]));
    record("A4 nu-scaling K(2nu) = K(nu)/2", rel <= 1e-8, "rel=" + f2s(rel));
}

// ---------------------------------------------------------------------------
// A5: Darcy manufactured-solution order + conservative forcing
// ---------------------------------------------------------------------------
void criterion_5() {
    const Mat2 K = {{{2.0, 0.5}, {0.5, 1.0}}};
    ForceSpec spec;
    spec.kind = ForceKind::manufactured;

    auto errors = [&](int g, double& ep, double& eu) {
        BodyForce2D f = sample_force(spec, g, g, 1.0, 1.0, &K);
        DarcySolution sol = solve_darcy(K, f, g, g);
        ManufacturedDarcy m;
        m.K = K;
        double pn = 0, pd = 0, un = 0, ud = 0, pmean = 0;
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i)
                pmean += m.exact_pressure((i + 0.5) * sol.hx, (j + 0.5) * sol.hy);
        pmean /= g * g;
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i) {
                const double x = (i + 0.5) * sol.hx, y = (j + 0.5) * sol.hy;
                const double pe = m.exact_pressure(x, y) - pmean;
                pn += std::pow(sol.p(i, j) - pe, 2);
                pd += pe * pe;
                const auto Ue = m.exact_velocity(x, y);
                un += std::pow(sol.Ux(i, j) - Ue[0], 2) +
                      std::pow(sol.Uy(i, j) - Ue[1], 2);
                ud += Ue[0] * Ue[0] + Ue[1] * Ue[1];
            }
        ep = std::sqrt(pn / pd);
        eu = std::sqrt(un / ud);
    };
    double p32, u32, p64, u64, p128, u128;
    errors(32, p32, u32);
    errors(64, p64, u64);
    errors(128, p128, u128);
    const double op = std::log2(p32 / p128) / 2.0;
    const double ou = std::log2(u32 / u128) / 2.0;

    // Conservative forcing: f = grad(phi) must be absorbed by the pressure.
    ForceSpec grad;
    grad.kind = ForceKind::gradient;
    grad.params = {1.0};
    const int g = 64;
    BodyForce2D fg = sample_force(grad, g, g, 1.0, 1.0);
    DarcySolution gsol = solve_darcy(K, fg, g, g);
    double un2 = 0, kf2 = 0;
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
            un2 += gsol.Ux(i, j) * gsol.Ux(i, j) + gsol.Uy(i, j) * gsol.Uy(i, j);
            const double kx = K[0][0] * fg.fx_c(i, j) + K[0][1] * fg.fy_c(i, j);
            const double ky = K[1][0] * fg.fx_c(i, j) + K[1][1] * fg.fy_c(i, j);
            kf2 += kx * kx + ky * ky;
        }
    const bool conservative_ok = std::sqrt(un2) <= 1e-6 * std::sqrt(kf2);

    const bool ok = op >= 1.8 && op <= 2.2 && ou >= 1.8 && ou <= 2.2 && conservative_ok;
    record("A5 darcy manufactured solution: second-order convergence", ok,
           "order_p=" + f2s(op) + " order_U=" + f2s(ou) +
               " |U|/|K f| (conservative)=" + f2s(std::sqrt(un2 / kf2)));
}

// ---------------------------------------------------------------------------
// A6: unfolding norm identities on random fields
// ---------------------------------------------------------------------------
void criterion_6() {
    ThinDomainSpec spec = ThinDomainSpec::make(1.0, 1.0, 0.25, 0.125);
    const int n_c = 4;
    DeterministicRng rng(2024);
    double worst = 0.0;
    bool roundtrip = true;
    for (int t = 0; t < 100; ++t) {
        DilatedField f = DilatedField::zeros(spec, n_c, 1);
        for (std::size_t i = 0; i < f.comp[0].size(); ++i)
            f.comp[0][i] = rng.uniform(-1.0, 1.0);
        UnfoldReport rep = verify_norm_identities(f);
        worst = std::max({worst, rep.defect_a, rep.defect_b, rep.defect_c});
        DilatedField back = fold(unfold(f));
        for (std::size_t i = 0; i < f.comp[0].size(); ++i)
            roundtrip = roundtrip && back.comp[0][i] == f.comp[0][i];
    }
    record("A6 unfolding norm identities on 100 random fields",
           worst <= 1e-12 && roundtrip,
           "max defect=" + f2s(worst) + (roundtrip ? ", round trip exact" : ", ROUND TRIP BROKEN"));
}

// ---------------------------------------------------------------------------
// A7/A8: DNS scaling audit and Stokes-to-Darcy convergence
// ---------------------------------------------------------------------------
struct DnsCase {
    DnsSolution sol;
    ComparisonReport cmp;
};

DnsCase run_dns_case(double a_eps, const ForceSpec& force, const Mat2& K) {
    ObstacleShape s;
    s.kind = ShapeKind::sphere;
    s.radius = 0.25;
    const int n_c = 8;
    CellMask cell = voxelize_cell(s, n_c);
    ThinDomainSpec spec = ThinDomainSpec::make(1.0, 1.0, 0.25, a_eps);
    PerforatedMask3D mask = build_thin_domain(spec, cell);
    SolverConfig cfg;
    cfg.max_outer = 2000;
    cfg.max_inner = 20000;
    DnsCase c{solve_dns(mask, force, cfg), {}};
    BodyForce2D f = sample_force(force, spec.mx, spec.my, spec.Lx, spec.Ly, &K);
    DarcySolution darcy = solve_darcy(K, f, spec.mx, spec.my);
    c.cmp = darcy_comparison(c.sol, darcy);
    return c;
}

void criteria_7_8() {
    ForceSpec force;
    force.kind = ForceKind::vortex;
    force.params = {1.0};
    // Reference tensor at n = n_c = 8, in the mean-velocity form: that is the
    // exact flow response of the discrete periodic array the DNS resolves
    // (the energy form differs by its O(h) boundary-layer deficit and would
    // contaminate the convergence measurement with a fixed offset).
    const Mat2& Ka = g_pairs.at(8).K.K_alt;
    const Mat2 K = {{{Ka[0][0], 0.5 * (Ka[0][1] + Ka[1][0])},
                     {0.5 * (Ka[0][1] + Ka[1][0]), Ka[1][1]}}};

    const double t0 = now();
    DnsCase coarse = run_dns_case(0.125, force, K);
    DnsCase fine = run_dns_case(0.0625, force, K);
    const double secs = now() - t0;

    ScalingReport audit = scaling_audit({summarize(coarse.sol), summarize(fine.sol)});
    const double ru0 = audit.rows[0].ratio_u, ru1 = audit.rows[1].ratio_u;
    const double rd0 = audit.rows[0].ratio_Du, rd1 = audit.rows[1].ratio_Du;
    const bool ok7 = audit.bounded && ru1 <= 2.0 * ru0 && rd1 <= 2.0 * rd0 &&
                     ru0 <= 2.0 * ru1 && rd0 <= 2.0 * rd1;
    record("A7 a priori scaling ratios stay within 2x as a_eps halves", ok7,
           "ratio_u " + f2s(ru0) + " -> " + f2s(ru1) + "; ratio_Du " + f2s(rd0) +
               " -> " + f2s(rd1) + "; t=" + f2s(secs) + "s");

    const bool ok8 = fine.cmp.rel_err_velocity < coarse.cmp.rel_err_velocity &&
                     fine.cmp.u3_ratio < coarse.cmp.u3_ratio;
    record("A8 averaged DNS converges toward the Darcy prediction", ok8,
           "rel_err_velocity " + f2s(coarse.cmp.rel_err_velocity) + " -> " +
               f2s(fine.cmp.rel_err_velocity) + "; u3_ratio " +
               f2s(coarse.cmp.u3_ratio) + " -> " + f2s(fine.cmp.u3_ratio) +
               "; rel_err_pressure " + f2s(coarse.cmp.rel_err_pressure) + " -> " +
               f2s(fine.cmp.rel_err_pressure));
}

// ---------------------------------------------------------------------------
// A9: obstacle-free Poiseuille oracle
// ---------------------------------------------------------------------------
void criterion_9() {
    const double t0 = now();
    CellMask cell;
    cell.n = 4;
    cell.fluid.assign(64, 1);
    ThinDomainSpec spec = ThinDomainSpec::make(1.0, 1.0, 1.0 / 16.0, 1.0 / 32.0);
    PerforatedMask3D mask = build_thin_domain(spec, cell);
    SolverConfig cfg;
    cfg.max_outer = 2000;
    cfg.max_inner = 20000;
    ForceSpec force;
    force.kind = ForceKind::constant;
    force.params = {1.0, 0.0};
    // Horizontally periodic plates: the configuration the closed-form
    // profile solves (a fully closed box absorbs the force into p).
    DnsSolution sol = solve_dns(mask, force, cfg, 10'000'000, false,
                                BoundaryMode::channel);

    const double exact = spec.epsilon * spec.epsilon / (8.0 * cfg.nu);
    double umax = 0.0;
    const int i0 = sol.grid.nx / 2, j0 = sol.grid.ny / 2;
    for (int k = 0; k < sol.grid.nz; ++k) umax = std::max(umax, sol.u.c[0](i0, j0, k));
    const double rel = std::abs(umax - exact) / exact;
    record("A9 poiseuille profile maximum within 10%", rel < 0.10,
           "u_max=" + f2s(umax) + " vs " + f2s(exact) + " rel=" + f2s(rel) + " t=" +
               f2s(now() - t0) + "s");
}

// ---------------------------------------------------------------------------
// A10: bitwise determinism of the pipeline
// ---------------------------------------------------------------------------
void criterion_10() {
    const std::string config =
        "shape.kind = sphere\n"
        "shape.radius = 0.25\n"
        "cell.n = 6\n"
        "domain.Lx = 0.25\n"
        "domain.Ly = 0.25\n"
        "domain.epsilon = 0.125\n"
        "domain.a_eps = 0.0625\n"
        "domain.n_c = 4\n"
        "darcy.gx = 4\n"
        "darcy.gy = 4\n"
        "force.kind = vortex\n"
        "force.params = 1.0\n"
        "unfold.trials = 10\n";
    RunConfig cfg = parse_config_text(config);
    const fs::path root = fs::temp_directory_path() / "permahom_acceptance_det";
    fs::remove_all(root);
    run_pipeline(cfg, root / "a");
    run_pipeline(cfg, root / "b");

    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(root / "a"))
        if (e.is_regular_file() && (e.path().extension() == ".csv" ||
                                    e.path().extension() == ".vtk"))
            fa.push_back(fs::relative(e.path(), root / "a"));
    std::sort(fa.begin(), fa.end());
    bool ok = !fa.empty();
    for (const auto& rel : fa)
        ok = ok && read_file(root / "a" / rel) == read_file(root / "b" / rel);
    record("A10 pipeline reruns are bitwise identical", ok,
           std::to_string(fa.size()) + " files compared");
    fs::remove_all(root);
}

}  // namespace

int main() {
    std::cout << "=== acceptance suite ===\n";
    const double t0 = now();
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criteria_7_8();
        criterion_9();
        criterion_10();
    } catch (const std::exception& e) {
        std::cout << "[FAIL] suite aborted: " << e.what() << "\n";
        ++g_fail;
    }
    std::cout << "=== " << g_pass << " passed, " << g_fail << " failed, "
              << f2s(now() - t0) << "s total ===\n";
    return g_fail == 0 ? 0 : 1;
}
