#include "permahom/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace permahom {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw IoError("short write on '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double CsvTable::number(std::size_t row, int col) const {
    if (col < 0 || row >= rows.size() ||
        static_cast<std::size_t>(col) >= rows[row].size())
        throw IoError("csv cell out of range");
    return std::stod(rows[row][col]);
}

std::string to_csv(const CsvTable& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? "," : "") << t.header[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

CsvTable read_csv(const fs::path& path) {
    const std::string text = read_file(path);
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    if (first) throw IoError("empty csv '" + path.string() + "'");
    return t;
}

void write_structured_points(const fs::path& path, const std::string& title,
                             const StructuredGrid& grid) {
    const std::size_t npts = static_cast<std::size_t>(grid.dims[0]) * grid.dims[1] *
                             grid.dims[2];
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.dims[0] << " " << grid.dims[1] << " " << grid.dims[2]
        << "\n";
    out << "ORIGIN " << fmt(grid.origin[0]) << " " << fmt(grid.origin[1]) << " "
        << fmt(grid.origin[2]) << "\n";
    out << "SPACING " << fmt(grid.spacing[0]) << " " << fmt(grid.spacing[1]) << " "
        << fmt(grid.spacing[2]) << "\n";
    out << "POINT_DATA " << npts << "\n";
    for (const auto& f : grid.fields) {
        if (f.data.size() != npts)
            throw IoError("field '" + f.name + "' size does not match grid");
        out << "SCALARS " << f.name << (f.integer ? " int 1\n" : " double 1\n");
        out << "LOOKUP_TABLE default\n";
        if (f.integer) {
            for (double v : f.data) out << static_cast<long long>(v) << "\n";
        } else {
            for (double v : f.data) out << fmt(v) << "\n";
        }
    }
    write_file_atomic(path, out.str());
}

StructuredGrid read_structured_points(const fs::path& path) {
    std::istringstream in(read_file(path));
    StructuredGrid g;
    std::string tok;
    // header: skip the two comment/title lines and the ASCII marker
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    while (in >> tok) {
        if (tok == "DATASET") {
            in >> tok;
            if (tok != "STRUCTURED_POINTS")
                throw IoError("unsupported dataset in '" + path.string() + "'");
        } else if (tok == "DIMENSIONS") {
            in >> g.dims[0] >> g.dims[1] >> g.dims[2];
        } else if (tok == "ORIGIN") {
            in >> g.origin[0] >> g.origin[1] >> g.origin[2];
        } else if (tok == "SPACING") {
            in >> g.spacing[0] >> g.spacing[1] >> g.spacing[2];
        } else if (tok == "POINT_DATA" || tok == "CELL_DATA") {
            std::size_t n;
            in >> n;
        } else if (tok == "SCALARS") {
            GridScalars f;
            std::string type, comps;
            in >> f.name >> type >> comps;
            f.integer = (type == "int");
            in >> tok;  // LOOKUP_TABLE
            in >> tok;  // default
            const std::size_t npts = static_cast<std::size_t>(g.dims[0]) * g.dims[1] *
                                     g.dims[2];
            f.data.resize(npts);
            for (std::size_t i = 0; i < npts; ++i)
                if (!(in >> f.data[i]))
                    throw IoError("truncated scalars in '" + path.string() + "'");
            g.fields.push_back(std::move(f));
        } else {
            throw IoError("unexpected token '" + tok + "' in '" + path.string() + "'");
        }
    }
    if (g.dims[0] <= 0) throw IoError("missing DIMENSIONS in '" + path.string() + "'");
    return g;
}

std::vector<double> flatten(const Array3& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

Array3 unflatten(const std::vector<double>& v, int nx, int ny, int nz) {
    if (v.size() != static_cast<std::size_t>(nx) * ny * nz)
        throw IoError("field size does not match requested dims");
    Array3 a(nx, ny, nz);
    std::copy(v.begin(), v.end(), a.data());
    return a;
}

}  // namespace permahom
