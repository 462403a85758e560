#pragma once

#include <optional>
#include <string>
#include <vector>

#include "permahom/darcy2d.hpp"
#include "permahom/geometry.hpp"
#include "permahom/stokes.hpp"

namespace permahom {

enum class Stage { cell, k, darcy, dns, compare, verify_unfold };

std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

/// Validated run configuration (flat key-value file, see README for keys).
/// Sections are optional; each stage checks that what it needs is present.
struct RunConfig {
    std::optional<ObstacleShape> shape;
    std::optional<int> cell_n;
    std::optional<ThinDomainSpec> domain;
    std::optional<int> n_c;
    SolverConfig solver;
    std::optional<int> darcy_gx, darcy_gy;
    std::optional<ForceSpec> force;
    std::vector<Stage> stages;  // empty: inferred from the sections present
    long long grid_cap = 10'000'000;
    BoundaryMode dns_mode = BoundaryMode::no_slip_walls;
    bool dns_write_fields = false;
    int unfold_trials = 100;
    std::uint64_t config_hash = 0;  // FNV-1a of the file bytes

    const ObstacleShape& require_shape(const char* stage) const;
    int require_cell_n(const char* stage) const;
    const ThinDomainSpec& require_domain(const char* stage) const;
    int require_n_c(const char* stage) const;
    const ForceSpec& require_force(const char* stage) const;
    std::pair<int, int> require_darcy_grid(const char* stage) const;
};

/// Parse and validate a config file. Unknown keys are rejected by name;
/// malformed lines raise ParseError with the line number.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace permahom
