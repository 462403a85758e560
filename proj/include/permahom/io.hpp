#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "permahom/array3.hpp"
#include "permahom/errors.hpp"

namespace permahom {

/// Shortest round-trip decimal representation ("%.17g").
std::string fmt(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Write to a temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---- CSV (RFC-4180-style, '.' decimal, header row) ----

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    double number(std::size_t row, int col) const;
};

std::string to_csv(const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& path);

// ---- Legacy-ASCII structured grid (STRUCTURED_POINTS layout) ----

struct GridScalars {
    std::string name;
    bool integer = false;
    std::vector<double> data;  // x fastest
};

struct StructuredGrid {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> origin{0, 0, 0};
    std::array<double, 3> spacing{0, 0, 0};
    std::vector<GridScalars> fields;
};

void write_structured_points(const std::filesystem::path& path, const std::string& title,
                             const StructuredGrid& grid);
StructuredGrid read_structured_points(const std::filesystem::path& path);

/// Array3 <-> flat helpers (x fastest both sides).
std::vector<double> flatten(const Array3& a);
Array3 unflatten(const std::vector<double>& v, int nx, int ny, int nz);

}  // namespace permahom
