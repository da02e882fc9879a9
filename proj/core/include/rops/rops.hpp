#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rops/lrf.hpp"
#include "rops/mesh.hpp"

namespace rops {

enum class RotationSchedule : int32_t {
    /// theta_k = (k-1) * 2*pi / T for k = 1..T (includes the unrotated pose).
    UniformFullCircle = 0,
    /// theta_k = (k-1) * pi / T.
    UniformHalfCircle = 1,
};

struct RopsParams {
    int32_t bins = 5;             // L: partition bins per side
    int32_t rotations = 3;        // T: rotations per coordinate axis
    double support_radius_mr = 15.0; // r, in mesh-resolution units
    int32_t combination = 6;      // statistics combination id, 1..8
    RotationSchedule schedule = RotationSchedule::UniformFullCircle;

    /// Throws ConfigError unless bins >= 2, rotations >= 1, radius > 0 and
    /// combination in 1..8.
    void validate() const;

    /// Statistics count of the chosen combination.
    int statistics_count() const;

    /// Total descriptor length: 3 axes * T * 3 planes * statistics.
    int descriptor_length() const;

    double rotation_angle(int k) const;

    bool operator==(const RopsParams&) const = default;
};

/// One statistic: a central moment order (m, n), or Shannon entropy when
/// entropy == true.
struct StatisticId {
    int m = 0;
    int n = 0;
    bool entropy = false;
};

/// The selectable statistics combinations, id 1..8.
std::span<const StatisticId> statistics_combination(int id);

/// L x L histogram of 2-d points over their bounding rectangle, normalized
/// to sum 1. Bins are half-open with the upper boundary closed; a collapsed
/// bounding-box dimension maps everything to index 0 of that dimension.
struct DistributionMatrix {
    int bins = 0;
    std::vector<double> values; // row-major, values[i * bins + j]

    double at(int i, int j) const { return values[size_t(i) * bins + j]; }
    double& at(int i, int j) { return values[size_t(i) * bins + j]; }
};

DistributionMatrix distribution_matrix(std::span<const Vec2> points, int bins);

/// Central moment mu_mn about the distribution centroid (1-based indices).
double central_moment(const DistributionMatrix& d, int m, int n);

/// Shannon entropy with natural logarithm; zero entries contribute zero.
double shannon_entropy(const DistributionMatrix& d);

/// Statistics of the chosen combination in its listed order.
std::vector<double> matrix_statistics(const DistributionMatrix& d, int combination);

struct RoPSDescriptor {
    std::vector<double> values;
    RopsParams params;
};

/// Local coordinates of a point set relative to an LRF.
std::vector<Vec3> transform_to_lrf(std::span<const Vec3> points, const LocalReferenceFrame& lrf);

/// The RoPS feature vector: the surface vertices are expressed in the LRF,
/// rotated about each frame axis by the schedule angles, projected onto the
/// xy/xz/yz planes, histogrammed, and condensed into the combination's
/// statistics. Concatenation is axis-major, then rotation, then plane, then
/// statistic. Throws DegenerateSurfaceError when the points are collinear.
RoPSDescriptor compute_rops(const LocalSurface& surface, const LocalReferenceFrame& lrf,
                            const RopsParams& params);

/// Euclidean distance. Throws ConfigError on length mismatch.
double descriptor_distance(const RoPSDescriptor& a, const RoPSDescriptor& b);
double descriptor_distance(std::span<const double> a, std::span<const double> b);

/// Mean L2 distance between corresponding descriptor pairs after min-max
/// normalizing every dimension over the whole evaluation set (both sides).
double average_normalized_l2(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b);

} // namespace rops
