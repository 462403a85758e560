#include "permahom/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "permahom/cell_stokes.hpp"
#include "permahom/io.hpp"
#include "permahom/rng.hpp"
#include "permahom/unfolding.hpp"

namespace permahom {

namespace fs = std::filesystem;

namespace {

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

StructuredGrid grid_for_mask_cell(const CellMask& mask) {
    StructuredGrid g;
    g.dims = {mask.n, mask.n, mask.n};
    const double h = mask.h();
    g.origin = {-0.5 + 0.5 * h, -0.5 + 0.5 * h, -0.5 + 0.5 * h};
    g.spacing = {h, h, h};
    GridScalars s;
    s.name = "solid";
    s.integer = true;
    s.data.reserve(mask.fluid.size());
    for (auto f : mask.fluid) s.data.push_back(f ? 0.0 : 1.0);
    g.fields.push_back(std::move(s));
    return g;
}

void write_cell_solution(const fs::path& dir, const CellSolution& sol, int i) {
    const int n = sol.mask.n;
    const double h = sol.grid.hx;
    StructuredGrid w;
    w.dims = {n, n, n};
    w.origin = {-0.5, -0.5, -0.5};
    w.spacing = {h, h, h};
    w.fields.push_back({"u1", false, flatten(sol.w.c[0])});
    w.fields.push_back({"u2", false, flatten(sol.w.c[1])});
    w.fields.push_back({"u3", false, flatten(sol.w.c[2])});
    write_structured_points(dir / ("w" + std::to_string(i) + ".vtk"),
                            "cell velocity w" + std::to_string(i) +
                                " (face-centered components)",
                            w);
    StructuredGrid p;
    p.dims = {n, n, n};
    p.origin = {-0.5 + 0.5 * h, -0.5 + 0.5 * h, -0.5 + 0.5 * h};
    p.spacing = {h, h, h};
    p.fields.push_back({"pi", false, flatten(sol.pi)});
    write_structured_points(dir / ("pi" + std::to_string(i) + ".vtk"),
                            "cell pressure pi" + std::to_string(i), p);
}

CellSolution read_cell_solution(const fs::path& dir, const CellMask& mask, double nu,
                                int i) {
    CellSolution sol;
    sol.mask = mask;
    sol.forcing_index = i;
    sol.nu = nu;
    StokesSystem sys = StokesSystem::from_cell_mask(mask);
    sol.grid = sys.grid();
    StructuredGrid w = read_structured_points(dir / ("w" + std::to_string(i) + ".vtk"));
    if (w.dims[0] != mask.n || w.dims[1] != mask.n || w.dims[2] != mask.n)
        throw MaskMismatch("cell velocity grid does not match the mask");
    sol.w = sys.make_face_field();
    for (const auto& f : w.fields) {
        int comp = -1;
        if (f.name == "u1") comp = 0;
        else if (f.name == "u2") comp = 1;
        else if (f.name == "u3") comp = 2;
        if (comp >= 0) sol.w.c[comp] = unflatten(f.data, mask.n, mask.n, mask.n);
    }
    StructuredGrid p = read_structured_points(dir / ("pi" + std::to_string(i) + ".vtk"));
    sol.pi = unflatten(p.fields.at(0).data, mask.n, mask.n, mask.n);
    return sol;
}

CsvTable name_value_table(const std::vector<std::pair<std::string, std::string>>& kv) {
    CsvTable t;
    t.header = {"name", "value"};
    for (const auto& [k, v] : kv) t.rows.push_back({k, v});
    return t;
}

std::map<std::string, std::string> read_name_values(const fs::path& path) {
    CsvTable t = read_csv(path);
    std::map<std::string, std::string> out;
    for (const auto& row : t.rows)
        if (row.size() >= 2) out[row[0]] = row[1];
    return out;
}

Array2 table_to_array2(const CsvTable& t, const std::string& field) {
    const int ci = t.column("i"), cj = t.column("j"), cv = t.column(field);
    if (ci < 0 || cj < 0 || cv < 0)
        throw IoError("csv is missing column '" + field + "'");
    int mx = 0, my = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        mx = std::max(mx, static_cast<int>(t.number(r, ci)) + 1);
        my = std::max(my, static_cast<int>(t.number(r, cj)) + 1);
    }
    Array2 a(mx, my, 0.0);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        a(static_cast<int>(t.number(r, ci)), static_cast<int>(t.number(r, cj))) =
            t.number(r, cv);
    return a;
}

}  // namespace

void write_K_csv(const fs::path& path, const PermeabilityTensor& K) {
    const auto eig = eigenvalues_sym2x2(K.K);
    CsvTable t = name_value_table({
        {"K11", fmt(K.K[0][0])},
        {"K12", fmt(K.K[0][1])},
        {"K21", fmt(K.K[1][0])},
        {"K22", fmt(K.K[1][1])},
        {"K_alt11", fmt(K.K_alt[0][0])},
        {"K_alt12", fmt(K.K_alt[0][1])},
        {"K_alt21", fmt(K.K_alt[1][0])},
        {"K_alt22", fmt(K.K_alt[1][1])},
        {"eig_min", fmt(eig[0])},
        {"eig_max", fmt(eig[1])},
        {"consistency_gap", fmt(K.consistency_gap)},
        {"n", std::to_string(K.n)},
        {"nu", fmt(K.nu)},
    });
    write_file_atomic(path, to_csv(t));
}

PermeabilityTensor read_K_csv(const fs::path& path) {
    auto kv = read_name_values(path);
    auto need = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw IoError("K.csv is missing '" + k + "'");
        return std::stod(it->second);
    };
    PermeabilityTensor K;
    K.K[0][0] = need("K11");
    K.K[0][1] = need("K12");
    K.K[1][0] = need("K21");
    K.K[1][1] = need("K22");
    K.K_alt[0][0] = need("K_alt11");
    K.K_alt[0][1] = need("K_alt12");
    K.K_alt[1][0] = need("K_alt21");
    K.K_alt[1][1] = need("K_alt22");
    K.consistency_gap = need("consistency_gap");
    K.n = static_cast<int>(need("n"));
    K.nu = need("nu");
    K.symmetry_defect = std::abs(K.K[0][1] - K.K[1][0]);
    return K;
}

StageOutcome run_cell_stage(const RunConfig& cfg, const fs::path& out_dir, int threads) {
    StageOutcome out;
    out.name = "cell";
    const double t0 = now_seconds();
    const ObstacleShape& shape = cfg.require_shape("cell");
    const int n = cfg.require_cell_n("cell");
    CellMask mask = voxelize_cell(shape, n);

    fs::create_directories(out_dir);
    write_structured_points(out_dir / "mask.vtk", "reference cell solid mask",
                            grid_for_mask_cell(mask));
    out.outputs.push_back(out_dir / "mask.vtk");

    std::array<CellSolution, 2> sols;
    if (threads >= 2) {
        std::exception_ptr err;
        std::thread worker([&] {
            try {
                sols[1] = solve_cell_problem(mask, 2, cfg.solver);
            } catch (...) {
                err = std::current_exception();
            }
        });
        sols[0] = solve_cell_problem(mask, 1, cfg.solver);
        worker.join();
        if (err) std::rethrow_exception(err);
    } else {
        sols[0] = solve_cell_problem(mask, 1, cfg.solver);
        sols[1] = solve_cell_problem(mask, 2, cfg.solver);
    }

    CsvTable report;
    report.header = {"i",
                     "iterations",
                     "momentum_residual",
                     "div_residual",
                     "mean_velocity_x",
                     "mean_velocity_y",
                     "mean_velocity_z"};
    for (int i = 1; i <= 2; ++i) {
        const CellSolution& sol = sols[i - 1];
        write_cell_solution(out_dir, sol, i);
        out.outputs.push_back(out_dir / ("w" + std::to_string(i) + ".vtk"));
        out.outputs.push_back(out_dir / ("pi" + std::to_string(i) + ".vtk"));
        const auto mean = solution_mean_velocity(sol);
        report.rows.push_back({std::to_string(i), std::to_string(sol.outer_iters),
                               fmt(sol.mom_residual), fmt(sol.div_residual),
                               fmt(mean[0]), fmt(mean[1]), fmt(mean[2])});
        out.metrics["mom_residual_" + std::to_string(i)] = sol.mom_residual;
        out.metrics["div_residual_" + std::to_string(i)] = sol.div_residual;
    }
    write_file_atomic(out_dir / "cell_report.csv", to_csv(report));
    out.outputs.push_back(out_dir / "cell_report.csv");

    write_file_atomic(out_dir / "cell_meta.csv",
                      to_csv(name_value_table({{"n", std::to_string(n)},
                                               {"nu", fmt(cfg.solver.nu)},
                                               {"porosity", fmt(porosity(mask))}})));
    out.outputs.push_back(out_dir / "cell_meta.csv");
    out.seconds = now_seconds() - t0;
    return out;
}

StageOutcome run_k_stage(const RunConfig& cfg, const fs::path& cell_dir,
                         const fs::path& out_dir) {
    (void)cfg;
    StageOutcome out;
    out.name = "k";
    const double t0 = now_seconds();

    StructuredGrid mg = read_structured_points(cell_dir / "mask.vtk");
    CellMask mask;
    mask.n = mg.dims[0];
    mask.fluid.reserve(mg.fields.at(0).data.size());
    for (double v : mg.fields.at(0).data) mask.fluid.push_back(v != 0.0 ? 0 : 1);

    auto meta = read_name_values(cell_dir / "cell_meta.csv");
    const double nu = std::stod(meta.at("nu"));

    CellSolution s1 = read_cell_solution(cell_dir, mask, nu, 1);
    CellSolution s2 = read_cell_solution(cell_dir, mask, nu, 2);
    PermeabilityTensor K = assemble_permeability(s1, s2);
    CertifyReport rep = certify(K);

    fs::create_directories(out_dir);
    write_K_csv(out_dir / "K.csv", K);
    out.outputs.push_back(out_dir / "K.csv");
    out.metrics["eig_min"] = rep.eig_min;
    out.metrics["eig_max"] = rep.eig_max;
    out.metrics["consistency_gap"] = rep.consistency_gap;
    out.seconds = now_seconds() - t0;
    return out;
}

StageOutcome run_darcy_stage(const RunConfig& cfg, const fs::path& k_csv,
                             const fs::path& out_dir) {
    StageOutcome out;
    out.name = "darcy";
    const double t0 = now_seconds();

    const auto [gx, gy] = cfg.require_darcy_grid("darcy");
    const ForceSpec& force = cfg.require_force("darcy");
    const double Lx = cfg.domain ? cfg.domain->Lx : 1.0;
    const double Ly = cfg.domain ? cfg.domain->Ly : 1.0;

    PermeabilityTensor K = read_K_csv(k_csv);
    BodyForce2D f = sample_force(force, gx, gy, Lx, Ly, &K.K);
    DarcySolution sol = solve_darcy(K, f, gx, gy);

    fs::create_directories(out_dir);
    CsvTable pt, ut;
    pt.header = {"i", "j", "x", "y", "p"};
    ut.header = {"i", "j", "x", "y", "Ux", "Uy"};
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            const std::string x = fmt((i + 0.5) * sol.hx);
            const std::string y = fmt((j + 0.5) * sol.hy);
            pt.rows.push_back(
                {std::to_string(i), std::to_string(j), x, y, fmt(sol.p(i, j))});
            ut.rows.push_back({std::to_string(i), std::to_string(j), x, y,
                               fmt(sol.Ux(i, j)), fmt(sol.Uy(i, j))});
        }
    write_file_atomic(out_dir / "p.csv", to_csv(pt));
    write_file_atomic(out_dir / "U.csv", to_csv(ut));
    out.outputs.push_back(out_dir / "p.csv");
    out.outputs.push_back(out_dir / "U.csv");

    StructuredGrid vg;
    vg.dims = {gx, gy, 1};
    vg.origin = {0.5 * sol.hx, 0.5 * sol.hy, 0.0};
    vg.spacing = {sol.hx, sol.hy, 1.0};
    std::vector<double> pd(sol.p.data(), sol.p.data() + sol.p.size());
    std::vector<double> uxd(sol.Ux.data(), sol.Ux.data() + sol.Ux.size());
    std::vector<double> uyd(sol.Uy.data(), sol.Uy.data() + sol.Uy.size());
    vg.fields.push_back({"p", false, pd});
    vg.fields.push_back({"Ux", false, uxd});
    vg.fields.push_back({"Uy", false, uyd});
    write_structured_points(out_dir / "darcy.vtk", "darcy pressure and velocity", vg);
    out.outputs.push_back(out_dir / "darcy.vtk");

    write_file_atomic(out_dir / "darcy_meta.csv",
                      to_csv(name_value_table({{"gx", std::to_string(gx)},
                                               {"gy", std::to_string(gy)},
                                               {"Lx", fmt(Lx)},
                                               {"Ly", fmt(Ly)},
                                               {"flux_residual", fmt(sol.flux_residual)},
                                               {"iterations", std::to_string(sol.iters)}})));
    out.outputs.push_back(out_dir / "darcy_meta.csv");
    out.metrics["flux_residual"] = sol.flux_residual;
    out.metrics["iterations"] = sol.iters;
    out.seconds = now_seconds() - t0;
    return out;
}

StageOutcome run_dns_stage(const RunConfig& cfg, const fs::path& out_dir,
                           bool override_cap) {
    StageOutcome out;
    out.name = "dns";
    const double t0 = now_seconds();

    const ThinDomainSpec& spec = cfg.require_domain("dns");
    const int n_c = cfg.require_n_c("dns");
    const ForceSpec& force = cfg.require_force("dns");

    CellMask cell;
    if (cfg.shape) {
        cell = voxelize_cell(*cfg.shape, n_c);
    } else {
        cell.n = n_c;
        cell.fluid.assign(static_cast<std::size_t>(n_c) * n_c * n_c, 1);
    }
    PerforatedMask3D mask = build_thin_domain(spec, cell);
    DnsSolution sol = solve_dns(mask, force, cfg.solver, cfg.grid_cap, override_cap,
                                cfg.dns_mode);
    AveragedVelocity avg = average_velocity(sol);
    Array2 pbar = column_pressure_average(sol);

    fs::create_directories(out_dir);
    CsvTable ub, pb;
    ub.header = {"i", "j", "x", "y", "ubar1", "ubar2", "ubar3", "ubar1_scaled",
                 "ubar2_scaled"};
    pb.header = {"i", "j", "x", "y", "pbar"};
    for (int j = 0; j < spec.my; ++j)
        for (int i = 0; i < spec.mx; ++i) {
            const std::string x = fmt((i + 0.5) * spec.a_eps);
            const std::string y = fmt((j + 0.5) * spec.a_eps);
            ub.rows.push_back({std::to_string(i), std::to_string(j), x, y,
                               fmt(avg.u1(i, j)), fmt(avg.u2(i, j)), fmt(avg.u3(i, j)),
                               fmt(avg.u1_scaled(i, j)), fmt(avg.u2_scaled(i, j))});
            pb.rows.push_back(
                {std::to_string(i), std::to_string(j), x, y, fmt(pbar(i, j))});
        }
    write_file_atomic(out_dir / "ubar.csv", to_csv(ub));
    write_file_atomic(out_dir / "pbar.csv", to_csv(pb));
    out.outputs.push_back(out_dir / "ubar.csv");
    out.outputs.push_back(out_dir / "pbar.csv");

    write_file_atomic(
        out_dir / "dns_summary.csv",
        to_csv(name_value_table({{"a_eps", fmt(spec.a_eps)},
                                 {"eps", fmt(spec.epsilon)},
                                 {"Lx", fmt(spec.Lx)},
                                 {"Ly", fmt(spec.Ly)},
                                 {"n_c", std::to_string(n_c)},
                                 {"porosity", fmt(sol.porosity)},
                                 {"nu", fmt(cfg.solver.nu)},
                                 {"iterations", std::to_string(sol.outer_iters)},
                                 {"inner_iterations", std::to_string(sol.inner_iters)},
                                 {"momentum_residual", fmt(sol.mom_residual)},
                                 {"div_residual", fmt(sol.div_residual)},
                                 {"norm_u_dilated", fmt(sol.norm_u_dilated)},
                                 {"norm_Du_dilated", fmt(sol.norm_Du_dilated)},
                                 {"ratio_u",
                                  fmt(sol.norm_u_dilated / (spec.a_eps * spec.a_eps))},
                                 {"ratio_Du", fmt(sol.norm_Du_dilated / spec.a_eps)}})));
    out.outputs.push_back(out_dir / "dns_summary.csv");

    if (cfg.dns_write_fields) {
        StructuredGrid mgrid;
        mgrid.dims = {mask.nx, mask.ny, mask.nz};
        const double h = mask.h();
        mgrid.origin = {0.5 * h, 0.5 * h, 0.5 * h};
        mgrid.spacing = {h, h, h};
        GridScalars ms;
        ms.name = "solid";
        ms.integer = true;
        ms.data.reserve(mask.fluid.size());
        for (auto fl : mask.fluid) ms.data.push_back(fl ? 0.0 : 1.0);
        mgrid.fields.push_back(std::move(ms));
        write_structured_points(out_dir / "mask.vtk", "thin perforated domain solid mask",
                                mgrid);
        out.outputs.push_back(out_dir / "mask.vtk");
        for (int c = 0; c < 3; ++c) {
            StructuredGrid g;
            const Array3& a = sol.u.c[c];
            g.dims = {a.nx(), a.ny(), a.nz()};
            g.origin = {0, 0, 0};
            g.spacing = {sol.grid.hx, sol.grid.hy, sol.grid.hz};
            g.fields.push_back({"u" + std::to_string(c + 1), false, flatten(a)});
            const fs::path p = out_dir / ("u" + std::to_string(c + 1) + ".vtk");
            write_structured_points(p, "dns velocity component (face-centered)", g);
            out.outputs.push_back(p);
        }
        StructuredGrid g;
        g.dims = {sol.grid.nx, sol.grid.ny, sol.grid.nz};
        g.origin = {0.5 * sol.grid.hx, 0.5 * sol.grid.hy, 0.5 * sol.grid.hz};
        g.spacing = {sol.grid.hx, sol.grid.hy, sol.grid.hz};
        g.fields.push_back({"p", false, flatten(sol.p)});
        write_structured_points(out_dir / "p.vtk", "dns pressure", g);
        out.outputs.push_back(out_dir / "p.vtk");
    }

    out.metrics["mom_residual"] = sol.mom_residual;
    out.metrics["div_residual"] = sol.div_residual;
    out.metrics["porosity"] = sol.porosity;
    out.seconds = now_seconds() - t0;
    return out;
}

StageOutcome run_compare_stage(const fs::path& dns_dir, const fs::path& darcy_dir,
                               const fs::path& out_csv) {
    StageOutcome out;
    out.name = "compare";
    const double t0 = now_seconds();

    auto summary = read_name_values(dns_dir / "dns_summary.csv");
    const double a_eps = std::stod(summary.at("a_eps"));
    const double eps = std::stod(summary.at("eps"));
    const double poro = std::stod(summary.at("porosity"));
    const double ratio_u = std::stod(summary.at("ratio_u"));
    const double ratio_Du = std::stod(summary.at("ratio_Du"));

    CsvTable ub = read_csv(dns_dir / "ubar.csv");
    Array2 u1 = table_to_array2(ub, "ubar1");
    Array2 u2 = table_to_array2(ub, "ubar2");
    Array2 u3 = table_to_array2(ub, "ubar3");
    Array2 pbar = table_to_array2(read_csv(dns_dir / "pbar.csv"), "pbar");
    Array2 dp = table_to_array2(read_csv(darcy_dir / "p.csv"), "p");
    CsvTable ut = read_csv(darcy_dir / "U.csv");
    Array2 dUx = table_to_array2(ut, "Ux");
    Array2 dUy = table_to_array2(ut, "Uy");

    ComparisonReport rep =
        compare_tables(a_eps, eps, poro, ratio_u, ratio_Du, u1, u2, u3, pbar, dp, dUx,
                       dUy);

    CsvTable t;
    t.header = {"a_eps",           "eps",
                "ratio_u",         "ratio_Du",
                "rel_err_velocity", "rel_err_pressure",
                "u3_ratio"};
    t.rows.push_back({fmt(rep.a_eps), fmt(rep.eps), fmt(rep.ratio_u), fmt(rep.ratio_Du),
                      fmt(rep.rel_err_velocity), fmt(rep.rel_err_pressure),
                      fmt(rep.u3_ratio)});
    write_file_atomic(out_csv, to_csv(t));
    out.outputs.push_back(out_csv);
    out.metrics["rel_err_velocity"] = rep.rel_err_velocity;
    out.metrics["rel_err_pressure"] = rep.rel_err_pressure;
    out.metrics["u3_ratio"] = rep.u3_ratio;
    out.seconds = now_seconds() - t0;
    return out;
}

StageOutcome run_verify_unfold_stage(const RunConfig& cfg, const fs::path& out_csv,
                                     int trials_override) {
    StageOutcome out;
    out.name = "verify-unfold";
    const double t0 = now_seconds();

    const ThinDomainSpec& spec = cfg.require_domain("verify-unfold");
    const int n_c = cfg.require_n_c("verify-unfold");
    const int trials = trials_override > 0 ? trials_override : cfg.unfold_trials;

    DeterministicRng rng(0x7065726d61686fULL);  // fixed seed: runs are seed-free
    double max_a = 0, max_b = 0, max_c = 0;
    for (int t = 0; t < trials; ++t) {
        DilatedField f = DilatedField::zeros(spec, n_c, 1);
        for (std::size_t i = 0; i < f.comp[0].size(); ++i)
            f.comp[0][i] = rng.uniform(-1.0, 1.0);
        UnfoldReport rep = verify_norm_identities(f);
        max_a = std::max(max_a, rep.defect_a);
        max_b = std::max(max_b, rep.defect_b);
        max_c = std::max(max_c, rep.defect_c);

        DilatedField back = fold(unfold(f));
        for (std::size_t i = 0; i < f.comp[0].size(); ++i)
            if (back.comp[0][i] != f.comp[0][i])
                throw ValidationError("fold(unfold(field)) is not the identity");
    }

    CsvTable t;
    t.header = {"identity_a_defect", "identity_b_defect", "identity_c_defect", "trials",
                "max_defect"};
    t.rows.push_back({fmt(max_a), fmt(max_b), fmt(max_c), std::to_string(trials),
                      fmt(std::max({max_a, max_b, max_c}))});
    write_file_atomic(out_csv, to_csv(t));
    out.outputs.push_back(out_csv);
    out.metrics["max_defect"] = std::max({max_a, max_b, max_c});
    out.seconds = now_seconds() - t0;
    return out;
}

namespace {

std::vector<Stage> infer_stages(const RunConfig& cfg) {
    std::vector<Stage> s;
    const bool cell_ok = cfg.shape && cfg.cell_n;
    if (cell_ok) {
        s.push_back(Stage::cell);
        s.push_back(Stage::k);
    }
    const bool darcy_ok = cell_ok && cfg.darcy_gx && cfg.darcy_gy && cfg.force;
    if (darcy_ok) s.push_back(Stage::darcy);
    const bool dns_ok = cfg.domain && cfg.n_c && cfg.force;
    if (dns_ok) s.push_back(Stage::dns);
    if (darcy_ok && dns_ok) s.push_back(Stage::compare);
    if (cfg.domain && cfg.n_c) s.push_back(Stage::verify_unfold);
    if (s.empty())
        throw ValidationError("config enables no pipeline stage; set pipeline.stages");
    return s;
}

void write_manifest(const fs::path& out_dir, const RunConfig& cfg,
                    const RunManifest& m) {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    j["config_hash"] = hash;
    j["ok"] = m.ok;
    if (!m.failed_stage.empty()) j["failed_stage"] = m.failed_stage;
    nlohmann::json stages = nlohmann::json::array();
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& st : m.stages) {
        nlohmann::json s;
        s["name"] = st.name;
        s["status"] = st.status;
        s["seconds"] = st.seconds;
        s["metrics"] = st.metrics;
        stages.push_back(s);
        for (const auto& p : st.outputs) {
            nlohmann::json o;
            o["path"] = fs::relative(p, out_dir).string();
            const std::string bytes = read_file(p);
            o["bytes"] = bytes.size();
            o["fnv1a64"] = fnv1a64_hex(bytes);
            outputs.push_back(o);
        }
    }
    j["stages"] = stages;
    j["outputs"] = outputs;
    write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

RunManifest run_pipeline(const RunConfig& cfg, const fs::path& out_dir,
                         bool override_cap) {
    std::vector<Stage> stages = cfg.stages.empty() ? infer_stages(cfg) : cfg.stages;
    // Canonical order regardless of listing order.
    std::vector<Stage> order = {Stage::cell,    Stage::k,       Stage::darcy,
                                Stage::dns,     Stage::compare, Stage::verify_unfold};
    std::vector<Stage> todo;
    for (Stage s : order)
        for (Stage t : stages)
            if (s == t) {
                todo.push_back(s);
                break;
            }

    RunManifest manifest;
    manifest.config_hash = cfg.config_hash;
    fs::create_directories(out_dir);

    for (Stage s : todo) {
        try {
            switch (s) {
                case Stage::cell:
                    manifest.stages.push_back(run_cell_stage(cfg, out_dir / "cell"));
                    break;
                case Stage::k:
                    manifest.stages.push_back(
                        run_k_stage(cfg, out_dir / "cell", out_dir / "k"));
                    break;
                case Stage::darcy:
                    manifest.stages.push_back(
                        run_darcy_stage(cfg, out_dir / "k" / "K.csv", out_dir / "darcy"));
                    break;
                case Stage::dns:
                    manifest.stages.push_back(
                        run_dns_stage(cfg, out_dir / "dns", override_cap));
                    break;
                case Stage::compare:
                    manifest.stages.push_back(
                        run_compare_stage(out_dir / "dns", out_dir / "darcy",
                                          out_dir / "compare" / "report.csv"));
                    break;
                case Stage::verify_unfold:
                    manifest.stages.push_back(run_verify_unfold_stage(
                        cfg, out_dir / "verify-unfold" / "report.csv"));
                    break;
            }
        } catch (...) {
            manifest.ok = false;
            manifest.failed_stage = to_string(s);
            StageOutcome failed;
            failed.name = to_string(s);
            failed.status = "failed";
            manifest.stages.push_back(failed);
            write_manifest(out_dir, cfg, manifest);
            throw;
        }
    }
    write_manifest(out_dir, cfg, manifest);
    return manifest;
}

}  // namespace permahom
