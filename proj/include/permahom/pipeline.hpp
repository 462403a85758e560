#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "permahom/config.hpp"
#include "permahom/dns_thin.hpp"
#include "permahom/permeability.hpp"

namespace permahom {

inline constexpr char kArtifactVersion[] = "0.1.0";

struct StageOutcome {
    std::string name;
    std::string status = "ok";
    double seconds = 0;
    std::map<std::string, double> metrics;
    std::vector<std::filesystem::path> outputs;
};

/// Per-run provenance: config hash, stage records, output inventory with
/// content checksums. Written atomically as manifest.json.
struct RunManifest {
    std::uint64_t config_hash = 0;
    std::vector<StageOutcome> stages;
    bool ok = true;
    std::string failed_stage;
};

// Individual stages (also the CLI subcommands). Each writes only into its
// own output directory and reads only upstream files.
/// threads >= 2 runs the two independent cell problems concurrently;
/// outputs are identical either way.
StageOutcome run_cell_stage(const RunConfig& cfg, const std::filesystem::path& out_dir,
                            int threads = 1);
StageOutcome run_k_stage(const RunConfig& cfg, const std::filesystem::path& cell_dir,
                         const std::filesystem::path& out_dir);
StageOutcome run_darcy_stage(const RunConfig& cfg, const std::filesystem::path& k_csv,
                             const std::filesystem::path& out_dir);
StageOutcome run_dns_stage(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           bool override_cap);
StageOutcome run_compare_stage(const std::filesystem::path& dns_dir,
                               const std::filesystem::path& darcy_dir,
                               const std::filesystem::path& out_csv);
/// trials_override > 0 replaces cfg.unfold_trials.
StageOutcome run_verify_unfold_stage(const RunConfig& cfg,
                                     const std::filesystem::path& out_csv,
                                     int trials_override = 0);

/// Execute the requested stages in canonical order under out_dir/<stage>/,
/// then write out_dir/manifest.json. Stage errors propagate after the
/// manifest marks the failed stage.
RunManifest run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir,
                         bool override_cap = false);

// K.csv round trip (name,value rows).
void write_K_csv(const std::filesystem::path& path, const PermeabilityTensor& K);
PermeabilityTensor read_K_csv(const std::filesystem::path& path);

}  // namespace permahom
