// permahom: Stokes-to-Darcy homogenization toolkit for thin porous media.
//
// Subcommands: cell, k, darcy, dns, compare, verify-unfold, pipeline.
// Exit codes: 0 ok, 2 config error, 3 solver non-convergence,
// 4 validation/property failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "permahom/config.hpp"
#include "permahom/pipeline.hpp"

namespace {

int verbosity() {
    const char* env = std::getenv("PERMAHOM_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "error") return 0;
    if (v == "debug") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (verbosity() >= 1) std::cerr << "[permahom] " << msg << "\n";
}

void print_outcome(const permahom::StageOutcome& o) {
    info("stage " + o.name + " done in " + std::to_string(o.seconds) + " s");
    if (verbosity() >= 2)
        for (const auto& [k, v] : o.metrics)
            std::cerr << "    " << k << " = " << v << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"permahom: thin porous media homogenization toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", dns_dir, darcy_dir, k_csv, cell_dir;
    std::string report_csv = "report.csv";
    int threads = 0, trials = 0;
    bool override_cap = false;

    app.add_option("--threads", threads,
                   "worker thread budget (stages are deterministic regardless)");
    app.add_flag("--override-grid-cap", override_cap,
                 "allow DNS grids above the unknown-count guardrail");

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
    };
    auto add_out = [&](CLI::App* cmd, const char* what = "output directory") {
        cmd->add_option("--out", out_dir, what);
    };

    CLI::App* cell = app.add_subcommand("cell", "solve the periodic cell problems");
    add_config(cell);
    add_out(cell);

    CLI::App* k = app.add_subcommand("k", "assemble the permeability tensor");
    add_config(k);
    add_out(k);
    k->add_option("--cell-dir", cell_dir, "directory holding the cell outputs");

    CLI::App* darcy = app.add_subcommand("darcy", "solve the homogenized Darcy problem");
    add_config(darcy);
    add_out(darcy);
    darcy->add_option("--k", k_csv, "permeability csv (defaults to <out>/k/K.csv)");

    CLI::App* dns = app.add_subcommand("dns", "direct Stokes simulation of the thin domain");
    add_config(dns);
    add_out(dns);

    CLI::App* compare = app.add_subcommand("compare", "DNS vs Darcy comparison report");
    compare->add_option("--dns", dns_dir, "dns output directory")->required();
    compare->add_option("--darcy", darcy_dir, "darcy output directory")->required();
    compare->add_option("--out", report_csv, "report csv path");

    CLI::App* unfold = app.add_subcommand("verify-unfold",
                                          "verify the unfolding norm identities");
    add_config(unfold);
    unfold->add_option("--trials", trials, "random trials (overrides unfold.trials)");
    unfold->add_option("--out", report_csv, "report csv path");

    CLI::App* pipeline = app.add_subcommand("pipeline", "run the configured stages");
    add_config(pipeline);
    add_out(pipeline);

    CLI11_PARSE(app, argc, argv);

    try {
        namespace fs = std::filesystem;
        // Stage subcommands write directly into --out; the defaults
        // reproduce the pipeline layout (out/cell, out/k, ...).
        auto stage_dir = [&](const CLI::App* cmd, const char* name) {
            if (cmd->count("--out")) return fs::path(out_dir);
            return fs::path("out") / name;
        };
        if (cell->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            print_outcome(permahom::run_cell_stage(cfg, stage_dir(cell, "cell"),
                                                   threads));
        } else if (k->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            const fs::path cdir = cell_dir.empty() ? fs::path("out") / "cell"
                                                   : fs::path(cell_dir);
            print_outcome(permahom::run_k_stage(cfg, cdir, stage_dir(k, "k")));
        } else if (darcy->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            const fs::path kpath =
                k_csv.empty() ? fs::path("out") / "k" / "K.csv" : fs::path(k_csv);
            print_outcome(
                permahom::run_darcy_stage(cfg, kpath, stage_dir(darcy, "darcy")));
        } else if (dns->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            print_outcome(
                permahom::run_dns_stage(cfg, stage_dir(dns, "dns"), override_cap));
        } else if (compare->parsed()) {
            print_outcome(permahom::run_compare_stage(dns_dir, darcy_dir, report_csv));
        } else if (unfold->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            print_outcome(permahom::run_verify_unfold_stage(cfg, report_csv, trials));
        } else if (pipeline->parsed()) {
            auto cfg = permahom::parse_config(config_path);
            auto manifest = permahom::run_pipeline(cfg, out_dir, override_cap);
            info("pipeline ok; " + std::to_string(manifest.stages.size()) +
                 " stage(s), manifest at " + (fs::path(out_dir) / "manifest.json").string());
        }
    } catch (const permahom::Error& e) {
        std::cerr << "permahom: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "permahom: internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
