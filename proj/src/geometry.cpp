#include "permahom/geometry.hpp"

#include <cmath>
#include <queue>

namespace permahom {

ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "sphere") return ShapeKind::sphere;
    if (s == "box") return ShapeKind::box;
    if (s == "superellipsoid") return ShapeKind::superellipsoid;
    throw ValidationError("unknown shape.kind '" + s + "'");
}

std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::sphere: return "sphere";
        case ShapeKind::box: return "box";
        case ShapeKind::superellipsoid: return "superellipsoid";
    }
    return "?";
}

bool ObstacleShape::contains(double x, double y, double z) const {
    const double dx = x - center[0];
    const double dy = y - center[1];
    const double dz = z - center[2];
    switch (kind) {
        case ShapeKind::sphere:
            return dx * dx + dy * dy + dz * dz < radius * radius;
        case ShapeKind::box:
            return std::abs(dx) < half_extents[0] && std::abs(dy) < half_extents[1] &&
                   std::abs(dz) < half_extents[2];
        case ShapeKind::superellipsoid: {
            const double s = std::pow(std::abs(dx) / half_extents[0], exponent) +
                             std::pow(std::abs(dy) / half_extents[1], exponent) +
                             std::pow(std::abs(dz) / half_extents[2], exponent);
            return s < 1.0;
        }
    }
    return false;
}

std::array<double, 3> ObstacleShape::extent() const {
    if (kind == ShapeKind::sphere) return {radius, radius, radius};
    return half_extents;
}

void ObstacleShape::validate() const {
    if (kind == ShapeKind::sphere) {
        if (!(radius > 0.0)) throw ValidationError("shape.radius must be > 0");
    } else {
        for (double he : half_extents)
            if (!(he > 0.0)) throw ValidationError("shape.half_extents must be > 0");
        if (kind == ShapeKind::superellipsoid && !(exponent > 0.0))
            throw ValidationError("shape.exponent must be > 0");
    }
    const auto ext = extent();
    for (int a = 0; a < 3; ++a) {
        if (!(std::abs(center[a]) + ext[a] < 0.5))
            throw ObstacleTouchesBoundary(
                "obstacle is not strictly inside the reference cell along axis " +
                std::to_string(a) + " (|center| + extent = " +
                std::to_string(std::abs(center[a]) + ext[a]) + " >= 0.5)");
    }
}

std::size_t CellMask::solid_count() const {
    std::size_t c = 0;
    for (auto f : fluid) c += (f == 0);
    return c;
}

std::size_t CellMask::fluid_count() const { return fluid.size() - solid_count(); }

std::size_t PerforatedMask3D::solid_count() const {
    std::size_t c = 0;
    for (auto f : fluid) c += (f == 0);
    return c;
}

namespace {

// Fluid voxels must form a single face-connected component under periodic
// wrap; the staggered stencil cannot couple across anything weaker.
void check_fluid_connected(const CellMask& mask) {
    const int n = mask.n;
    const std::size_t total = mask.fluid.size();
    std::size_t nfluid = mask.fluid_count();
    if (nfluid == 0) return;  // fully solid: nothing to connect

    std::vector<std::uint8_t> seen(total, 0);
    std::queue<std::array<int, 3>> q;
    bool started = false;
    for (int k = 0; k < n && !started; ++k)
        for (int j = 0; j < n && !started; ++j)
            for (int i = 0; i < n && !started; ++i)
                if (mask.is_fluid(i, j, k)) {
                    q.push({i, j, k});
                    seen[mask.idx(i, j, k)] = 1;
                    started = true;
                }
    std::size_t visited = 0;
    while (!q.empty()) {
        auto [i, j, k] = q.front();
        q.pop();
        ++visited;
        const int di[6] = {1, -1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, 1, -1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, 1, -1};
        for (int d = 0; d < 6; ++d) {
            int ii = (i + di[d] + n) % n;
            int jj = (j + dj[d] + n) % n;
            int kk = (k + dk[d] + n) % n;
            std::size_t id = mask.idx(ii, jj, kk);
            if (mask.fluid[id] && !seen[id]) {
                seen[id] = 1;
                q.push({ii, jj, kk});
            }
        }
    }
    if (visited != nfluid)
        throw DisconnectedFluid("fluid voxels form " + std::string("more than one") +
                                " periodic face-connected component (" +
                                std::to_string(visited) + " of " + std::to_string(nfluid) +
                                " reached)");
}

}  // namespace

void validate_cell_mask(const CellMask& mask) {
    const int n = mask.n;
    // All six boundary voxel layers of Y must be fluid.
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                bool boundary = (i == 0 || i == n - 1 || j == 0 || j == n - 1 ||
                                 k == 0 || k == n - 1);
                if (boundary && !mask.is_fluid(i, j, k))
                    throw ObstacleTouchesBoundary(
                        "voxelized obstacle reaches the boundary layer of Y at voxel (" +
                        std::to_string(i) + "," + std::to_string(j) + "," +
                        std::to_string(k) + ")");
            }
    check_fluid_connected(mask);
}

CellMask voxelize_cell(const ObstacleShape& shape, int n) {
    if (n < 4) throw ValidationError("cell.n must be >= 4");
    shape.validate();

    CellMask mask;
    mask.n = n;
    mask.fluid.assign(static_cast<std::size_t>(n) * n * n, 1);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (shape.contains(mask.center_coord(i), mask.center_coord(j),
                                   mask.center_coord(k)))
                    mask.fluid[mask.idx(i, j, k)] = 0;

    validate_cell_mask(mask);
    return mask;
}

ThinDomainSpec ThinDomainSpec::make(double Lx, double Ly, double epsilon, double a_eps) {
    if (!(Lx > 0) || !(Ly > 0) || !(epsilon > 0) || !(a_eps > 0))
        throw ValidationError("domain extents and a_eps must be > 0");
    auto int_ratio = [](double num, double den, const char* what) {
        double r = num / den;
        double rr = std::round(r);
        if (std::abs(r - rr) > 1e-12 * std::max(1.0, std::abs(r)) || rr < 1.0)
            throw NonIntegerTiling(std::string(what) + "/a_eps = " + std::to_string(r) +
                                   " is not a positive integer");
        return static_cast<int>(rr);
    };
    ThinDomainSpec s;
    s.Lx = Lx;
    s.Ly = Ly;
    s.epsilon = epsilon;
    s.a_eps = a_eps;
    s.mx = int_ratio(Lx, a_eps, "Lx");
    s.my = int_ratio(Ly, a_eps, "Ly");
    s.mz = int_ratio(epsilon, a_eps, "epsilon");
    if (!(a_eps < epsilon))
        throw ValidationError("domain.a_eps must be smaller than domain.epsilon");
    return s;
}

PerforatedMask3D build_thin_domain(const ThinDomainSpec& spec, const CellMask& cell) {
    // Re-validate so callers constructing the struct by hand cannot skip it.
    ThinDomainSpec s = ThinDomainSpec::make(spec.Lx, spec.Ly, spec.epsilon, spec.a_eps);

    PerforatedMask3D m;
    m.spec = s;
    m.n_c = cell.n;
    m.nx = s.mx * cell.n;
    m.ny = s.my * cell.n;
    m.nz = s.mz * cell.n;
    m.fluid.assign(static_cast<std::size_t>(m.nx) * m.ny * m.nz, 1);
    for (int k = 0; k < m.nz; ++k)
        for (int j = 0; j < m.ny; ++j)
            for (int i = 0; i < m.nx; ++i)
                m.fluid[m.idx(i, j, k)] =
                    cell.fluid[cell.idx(i % cell.n, j % cell.n, k % cell.n)];
    return m;
}

double porosity(const CellMask& mask) {
    return static_cast<double>(mask.fluid_count()) / static_cast<double>(mask.fluid.size());
}

double porosity(const PerforatedMask3D& mask) {
    std::size_t total = mask.fluid.size();
    return static_cast<double>(total - mask.solid_count()) / static_cast<double>(total);
}

}  // namespace permahom
