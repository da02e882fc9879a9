#include "rops/rops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rops/error.hpp"

namespace rops {

namespace {

// Table rows are fixed; order matters and is part of the descriptor layout.
const std::vector<StatisticId> kCombinations[8] = {
    /* 1 */ {{0, 2}, {1, 1}, {2, 0}},
    /* 2 */ {{0, 2}, {1, 1}, {2, 0}, {0, 3}, {1, 2}, {2, 1}, {3, 0}},
    /* 3 */
    {{0, 2}, {1, 1}, {2, 0}, {0, 3}, {1, 2}, {2, 1}, {3, 0},
     {0, 4}, {1, 3}, {2, 2}, {3, 1}, {4, 0}},
    /* 4 */
    {{0, 2}, {1, 1}, {2, 0}, {0, 3}, {1, 2}, {2, 1}, {3, 0},
     {0, 4}, {1, 3}, {2, 2}, {3, 1}, {4, 0}, {0, 0, true}},
    /* 5 */ {{1, 1}, {2, 1}, {1, 2}, {2, 2}},
    /* 6 */ {{1, 1}, {2, 1}, {1, 2}, {2, 2}, {0, 0, true}},
    /* 7 */ {{1, 1}, {2, 1}, {1, 2}, {2, 2}, {3, 1}, {1, 3}},
    /* 8 */ {{1, 1}, {2, 1}, {1, 2}, {2, 2}, {3, 1}, {1, 3}, {0, 0, true}},
};

} // namespace

void RopsParams::validate() const {
    if (bins < 2) throw ConfigError("rops params: bins (L) must be >= 2");
    if (rotations < 1) throw ConfigError("rops params: rotations (T) must be >= 1");
    if (!(support_radius_mr > 0.0)) throw ConfigError("rops params: support radius must be > 0");
    if (combination < 1 || combination > 8)
        throw ConfigError("rops params: combination id must be in 1..8");
    if (schedule != RotationSchedule::UniformFullCircle &&
        schedule != RotationSchedule::UniformHalfCircle)
        throw ConfigError("rops params: unknown rotation schedule");
}

int RopsParams::statistics_count() const {
    return int(statistics_combination(combination).size());
}

int RopsParams::descriptor_length() const {
    return 3 * rotations * 3 * statistics_count();
}

double RopsParams::rotation_angle(int k) const {
    const double span =
        schedule == RotationSchedule::UniformFullCircle ? 2.0 * std::numbers::pi : std::numbers::pi;
    return span * double(k) / double(rotations);
}

std::span<const StatisticId> statistics_combination(int id) {
    if (id < 1 || id > 8) throw ConfigError("statistics combination id must be in 1..8");
    return kCombinations[id - 1];
}

DistributionMatrix distribution_matrix(std::span<const Vec2> points, int bins) {
    if (points.empty()) throw ConfigError("distribution matrix of an empty point set");
    if (bins < 1) throw ConfigError("distribution matrix needs >= 1 bin");

    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    for (const Vec2& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double width_x = max_x - min_x;
    const double width_y = max_y - min_y;

    DistributionMatrix d;
    d.bins = bins;
    d.values.assign(size_t(bins) * size_t(bins), 0.0);

    auto bin_of = [bins](double v, double lo, double width) {
        if (width <= 0.0) return 0; // collapsed dimension
        int idx = int((v - lo) / width * bins);
        if (idx >= bins) idx = bins - 1; // upper boundary closed
        if (idx < 0) idx = 0;
        return idx;
    };

    const double share = 1.0 / double(points.size());
    for (const Vec2& p : points)
        d.at(bin_of(p.x, min_x, width_x), bin_of(p.y, min_y, width_y)) += share;
    return d;
}

double central_moment(const DistributionMatrix& d, int m, int n) {
    double mean_i = 0.0, mean_j = 0.0;
    for (int i = 0; i < d.bins; ++i) {
        for (int j = 0; j < d.bins; ++j) {
            mean_i += (i + 1) * d.at(i, j);
            mean_j += (j + 1) * d.at(i, j);
        }
    }
    double mu = 0.0;
    for (int i = 0; i < d.bins; ++i) {
        for (int j = 0; j < d.bins; ++j) {
            const double v = d.at(i, j);
            if (v == 0.0) continue;
            mu += std::pow((i + 1) - mean_i, m) * std::pow((j + 1) - mean_j, n) * v;
        }
    }
    return mu;
}

double shannon_entropy(const DistributionMatrix& d) {
    double e = 0.0;
    for (double v : d.values)
        if (v > 0.0) e -= v * std::log(v);
    return e;
}

std::vector<double> matrix_statistics(const DistributionMatrix& d, int combination) {
    const auto stats = statistics_combination(combination);
    std::vector<double> out;
    out.reserve(stats.size());
    for (const StatisticId& s : stats)
        out.push_back(s.entropy ? shannon_entropy(d) : central_moment(d, s.m, s.n));
    return out;
}

std::vector<Vec3> transform_to_lrf(std::span<const Vec3> points, const LocalReferenceFrame& lrf) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    const Mat3 to_local = lrf.axes.transposed();
    for (const Vec3& q : points) out.push_back((q - lrf.origin) * to_local);
    return out;
}

RoPSDescriptor compute_rops(const LocalSurface& surface, const LocalReferenceFrame& lrf,
                            const RopsParams& params) {
    params.validate();

    const TriangleMesh& mesh = *surface.mesh;
    const std::vector<int> vertex_ids = surface.vertex_ids();
    std::vector<Vec3> points;
    points.reserve(vertex_ids.size());
    for (int v : vertex_ids) points.push_back(mesh.vertices[v]);

    const std::vector<Vec3> local = transform_to_lrf(points, lrf);

    // Degenerate when all points are (near) collinear: the second moment
    // has rank < 2.
    {
        Mat3 second;
        Vec3 mean{};
        for (const Vec3& q : local) mean += q;
        mean = mean / double(local.size());
        for (const Vec3& q : local) second += outer(q - mean, q - mean);
        const SymEigen3 eig = sym_eigen3(second);
        if (!(eig.values[0] > 0.0) || eig.values[1] <= 1e-12 * eig.values[0])
            throw DegenerateSurfaceError("local surface points are collinear");
    }

    RoPSDescriptor out;
    out.params = params;
    out.values.reserve(size_t(params.descriptor_length()));

    std::vector<Vec3> rotated(local.size());
    std::vector<Vec2> projected(local.size());
    for (int axis = 0; axis < 3; ++axis) {
        for (int k = 0; k < params.rotations; ++k) {
            const Mat3 rot = rotation_about_axis(axis, params.rotation_angle(k));
            for (size_t i = 0; i < local.size(); ++i) rotated[i] = local[i] * rot;
            for (int plane = 0; plane < 3; ++plane) {
                // Plane order: xy (drop z), xz (drop y), yz (drop x).
                for (size_t i = 0; i < rotated.size(); ++i) {
                    const Vec3& q = rotated[i];
                    projected[i] = plane == 0 ? Vec2{q.x, q.y}
                                 : plane == 1 ? Vec2{q.x, q.z}
                                              : Vec2{q.y, q.z};
                }
                const DistributionMatrix d = distribution_matrix(projected, params.bins);
                for (double s : matrix_statistics(d, params.combination)) out.values.push_back(s);
            }
        }
    }
    return out;
}

double descriptor_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ConfigError("descriptor length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double descriptor_distance(const RoPSDescriptor& a, const RoPSDescriptor& b) {
    if (!(a.params == b.params)) throw ConfigError("descriptor parameter mismatch");
    return descriptor_distance(std::span<const double>(a.values),
                               std::span<const double>(b.values));
}

double average_normalized_l2(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size() || a.empty())
        throw ConfigError("average_normalized_l2 needs matched non-empty sets");
    const size_t dim = a[0].size();
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    auto scan = [&](const std::vector<std::vector<double>>& set) {
        for (const auto& f : set) {
            if (f.size() != dim) throw ConfigError("descriptor length mismatch");
            for (size_t d = 0; d < dim; ++d) {
                lo[d] = std::min(lo[d], f[d]);
                hi[d] = std::max(hi[d], f[d]);
            }
        }
    };
    scan(a);
    scan(b);

    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double s = 0.0;
        for (size_t d = 0; d < dim; ++d) {
            const double range = hi[d] - lo[d];
            if (range <= 0.0) continue;
            const double diff = (a[i][d] - b[i][d]) / range;
            s += diff * diff;
        }
        total += std::sqrt(s);
    }
    return total / double(a.size());
}

} // namespace rops
