#pragma once

#include <random>
#include <vector>

#include "rops/geometry.hpp"
#include "rops/mesh.hpp"

namespace rops::test {

inline Vec3 random_point(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> uni(lo, hi);
    return {uni(rng), uni(rng), uni(rng)};
}

/// Uniform point inside a triangle via the reflected-square trick.
inline Vec3 random_point_in_triangle(std::mt19937_64& rng, const Vec3& a, const Vec3& b,
                                     const Vec3& c) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double s = uni(rng);
    double t = uni(rng);
    if (s + t > 1.0) {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    return a + (b - a) * s + (c - a) * t;
}

/// Monte-Carlo oracle for the per-triangle scatter integral:
/// mean over uniform samples of (x - p)(x - p)^T.
inline Mat3 monte_carlo_triangle_scatter(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                                         const Vec3& p, long samples, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Mat3 acc;
    for (long i = 0; i < samples; ++i) {
        const Vec3 x = random_point_in_triangle(rng, p1, p2, p3) - p;
        acc += outer(x, x);
    }
    return acc * (1.0 / double(samples));
}

/// A soup of independent random triangles; valid but intentionally messy.
inline TriangleMesh random_triangle_soup(std::mt19937_64& rng, int triangles) {
    TriangleMesh mesh;
    for (int t = 0; t < triangles; ++t) {
        const Vec3 base = random_point(rng, -2.0, 2.0);
        const int i = int(mesh.vertices.size());
        mesh.vertices.push_back(base);
        mesh.vertices.push_back(base + random_point(rng, 0.05, 0.5));
        mesh.vertices.push_back(base + random_point(rng, 0.05, 0.5));
        mesh.triangles.push_back({i, i + 1, i + 2});
    }
    return mesh;
}

} // namespace rops::test
