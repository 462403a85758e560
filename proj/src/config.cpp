#include "permahom/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "permahom/io.hpp"

namespace permahom {

std::string to_string(Stage s) {
    switch (s) {
        case Stage::cell: return "cell";
        case Stage::k: return "k";
        case Stage::darcy: return "darcy";
        case Stage::dns: return "dns";
        case Stage::compare: return "compare";
        case Stage::verify_unfold: return "verify-unfold";
    }
    return "?";
}

Stage stage_from_string(const std::string& s) {
    if (s == "cell") return Stage::cell;
    if (s == "k") return Stage::k;
    if (s == "darcy") return Stage::darcy;
    if (s == "dns") return Stage::dns;
    if (s == "compare") return Stage::compare;
    if (s == "verify-unfold") return Stage::verify_unfold;
    throw ValidationError("unknown pipeline stage '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct KeyValueFile {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;
    std::map<std::string, bool> consumed;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        consumed[key] = true;
        return it->second;
    }

    void reject_unknown() const {
        for (const auto& [key, _] : values)
            if (!consumed.count(key))
                throw ValidationError("unknown key '" + key + "' (line " +
                                      std::to_string(lines.at(key)) + ")");
    }
};

KeyValueFile tokenize(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        if (kv.values.count(key))
            throw ValidationError("duplicate key '" + key + "' (line " +
                                  std::to_string(lineno) + ")");
        kv.values[key] = value;
        kv.lines[key] = lineno;
    }
    return kv;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        if (!std::isfinite(d)) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ValidationError("key '" + key + "': expected a finite number, got '" + v +
                              "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long n = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (...) {
        throw ValidationError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    return out;
}

}  // namespace

const ObstacleShape& RunConfig::require_shape(const char* stage) const {
    if (!shape)
        throw ValidationError(std::string("stage '") + stage +
                              "' needs the shape.* section");
    return *shape;
}

int RunConfig::require_cell_n(const char* stage) const {
    if (!cell_n)
        throw ValidationError(std::string("stage '") + stage + "' needs cell.n");
    return *cell_n;
}

const ThinDomainSpec& RunConfig::require_domain(const char* stage) const {
    if (!domain)
        throw ValidationError(std::string("stage '") + stage +
                              "' needs the domain.* section");
    return *domain;
}

int RunConfig::require_n_c(const char* stage) const {
    if (!n_c)
        throw ValidationError(std::string("stage '") + stage + "' needs domain.n_c");
    return *n_c;
}

const ForceSpec& RunConfig::require_force(const char* stage) const {
    if (!force)
        throw ValidationError(std::string("stage '") + stage +
                              "' needs the force.* section");
    return *force;
}

std::pair<int, int> RunConfig::require_darcy_grid(const char* stage) const {
    if (!darcy_gx || !darcy_gy)
        throw ValidationError(std::string("stage '") + stage +
                              "' needs darcy.gx and darcy.gy");
    return {*darcy_gx, *darcy_gy};
}

RunConfig parse_config_text(const std::string& text) {
    KeyValueFile kv = tokenize(text);
    RunConfig cfg;
    cfg.config_hash = fnv1a64(text);

    // shape section
    const bool has_shape = kv.has("shape.kind") || kv.has("shape.radius") ||
                           kv.has("shape.center") || kv.has("shape.half_extents") ||
                           kv.has("shape.exponent");
    if (has_shape) {
        ObstacleShape s;
        auto kind = kv.take("shape.kind");
        if (!kind) throw ValidationError("shape section needs shape.kind");
        s.kind = shape_kind_from_string(*kind);
        if (auto v = kv.take("shape.center")) {
            auto c = to_doubles("shape.center", *v);
            if (c.size() != 3)
                throw ValidationError("shape.center needs three components");
            s.center = {c[0], c[1], c[2]};
        }
        if (auto v = kv.take("shape.radius")) s.radius = to_double("shape.radius", *v);
        if (auto v = kv.take("shape.half_extents")) {
            auto c = to_doubles("shape.half_extents", *v);
            if (c.size() != 3)
                throw ValidationError("shape.half_extents needs three components");
            s.half_extents = {c[0], c[1], c[2]};
        }
        if (auto v = kv.take("shape.exponent"))
            s.exponent = to_double("shape.exponent", *v);
        if (s.kind == ShapeKind::sphere && !(s.radius > 0))
            throw ValidationError("shape.radius must be > 0 for spheres");
        if (s.kind != ShapeKind::sphere &&
            !(s.half_extents[0] > 0 && s.half_extents[1] > 0 && s.half_extents[2] > 0))
            throw ValidationError("shape.half_extents must be > 0");
        cfg.shape = s;
    }

    if (auto v = kv.take("cell.n")) {
        long long n = to_int("cell.n", *v);
        if (n < 4) throw ValidationError("cell.n must be >= 4");
        cfg.cell_n = static_cast<int>(n);
    }

    const bool has_domain = kv.has("domain.Lx") || kv.has("domain.Ly") ||
                            kv.has("domain.epsilon") || kv.has("domain.a_eps") ||
                            kv.has("domain.n_c");
    if (has_domain) {
        auto need = [&](const char* key) {
            auto v = kv.take(key);
            if (!v) throw ValidationError(std::string("domain section needs ") + key);
            return to_double(key, *v);
        };
        const double Lx = need("domain.Lx");
        const double Ly = need("domain.Ly");
        const double eps = need("domain.epsilon");
        const double a = need("domain.a_eps");
        try {
            cfg.domain = ThinDomainSpec::make(Lx, Ly, eps, a);
        } catch (const Error& e) {
            throw ValidationError(std::string("domain: ") + e.what());
        }
        if (auto v = kv.take("domain.n_c")) {
            long long n = to_int("domain.n_c", *v);
            if (n < 1) throw ValidationError("domain.n_c must be >= 1");
            cfg.n_c = static_cast<int>(n);
        }
    }

    if (auto v = kv.take("solver.tol_mom")) cfg.solver.tol_mom = to_double("solver.tol_mom", *v);
    if (auto v = kv.take("solver.tol_div")) cfg.solver.tol_div = to_double("solver.tol_div", *v);
    if (auto v = kv.take("solver.max_outer"))
        cfg.solver.max_outer = static_cast<int>(to_int("solver.max_outer", *v));
    if (auto v = kv.take("solver.max_inner"))
        cfg.solver.max_inner = static_cast<int>(to_int("solver.max_inner", *v));
    if (auto v = kv.take("solver.nu")) cfg.solver.nu = to_double("solver.nu", *v);
    try {
        cfg.solver.validate();
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }

    if (auto v = kv.take("darcy.gx")) {
        long long n = to_int("darcy.gx", *v);
        if (n < 4) throw ValidationError("darcy.gx must be >= 4");
        cfg.darcy_gx = static_cast<int>(n);
    }
    if (auto v = kv.take("darcy.gy")) {
        long long n = to_int("darcy.gy", *v);
        if (n < 4) throw ValidationError("darcy.gy must be >= 4");
        cfg.darcy_gy = static_cast<int>(n);
    }

    if (auto v = kv.take("force.kind")) {
        ForceSpec f;
        f.kind = force_kind_from_string(*v);
        if (auto p = kv.take("force.params")) f.params = to_doubles("force.params", *p);
        try {
            f.validate();
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
        cfg.force = f;
    } else if (kv.has("force.params")) {
        throw ValidationError("force.params given without force.kind");
    }

    if (auto v = kv.take("dns.lateral")) {
        if (*v == "walls") cfg.dns_mode = BoundaryMode::no_slip_walls;
        else if (*v == "periodic") cfg.dns_mode = BoundaryMode::channel;
        else throw ValidationError("dns.lateral must be 'walls' or 'periodic'");
    }
    if (auto v = kv.take("dns.cap")) {
        long long n = to_int("dns.cap", *v);
        if (n < 1) throw ValidationError("dns.cap must be >= 1");
        cfg.grid_cap = n;
    }
    if (auto v = kv.take("dns.write_fields"))
        cfg.dns_write_fields = to_int("dns.write_fields", *v) != 0;
    if (auto v = kv.take("unfold.trials")) {
        long long n = to_int("unfold.trials", *v);
        if (n < 1) throw ValidationError("unfold.trials must be >= 1");
        cfg.unfold_trials = static_cast<int>(n);
    }
    if (auto v = kv.take("pipeline.stages")) {
        std::istringstream in(*v);
        std::string tok;
        while (in >> tok) cfg.stages.push_back(stage_from_string(tok));
        if (cfg.stages.empty())
            throw ValidationError("pipeline.stages must name at least one stage");
    }

    kv.reject_unknown();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace permahom
