#include "rops/lrf.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rops/error.hpp"

namespace rops {

double LocalReferenceFrame::axis_ratio() const {
    if (eigenvalues[1] <= 0.0) return std::numeric_limits<double>::infinity();
    return eigenvalues[0] / eigenvalues[1];
}

Mat3 triangle_scatter(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p) {
    const Vec3 d[3] = {p1 - p, p2 - p, p3 - p};
    Mat3 acc;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) acc += outer(d[j], d[k]);
        acc += outer(d[j], d[j]);
    }
    return acc * (1.0 / 12.0);
}

ScatterAccumulation accumulate_scatter(const LocalSurface& surface) {
    if (surface.triangle_ids.empty()) throw DegenerateSurfaceError("empty local surface");

    const TriangleMesh& mesh = *surface.mesh;
    const Vec3 p = surface.center;
    const double r = surface.radius;

    // First pass: total of the cross-product magnitudes (2x area), the
    // denominator of the per-triangle area-ratio weight.
    double cross_total = 0.0;
    for (int t : surface.triangle_ids) {
        const auto& tri = mesh.triangles[t];
        cross_total += norm(cross(mesh.vertices[tri[1]] - mesh.vertices[tri[0]],
                                  mesh.vertices[tri[2]] - mesh.vertices[tri[0]]));
    }
    if (cross_total <= 0.0)
        throw DegenerateSurfaceError("local surface has zero total area");

    ScatterAccumulation acc;
    acc.total_area = 0.5 * cross_total;
    for (int t : surface.triangle_ids) {
        const auto& tri = mesh.triangles[t];
        const Vec3& p1 = mesh.vertices[tri[0]];
        const Vec3& p2 = mesh.vertices[tri[1]];
        const Vec3& p3 = mesh.vertices[tri[2]];

        const double w1 = norm(cross(p2 - p1, p3 - p1)) / cross_total;
        const Vec3 centroid = (p1 + p2 + p3) / 3.0;
        const double margin = r - norm(p - centroid);
        const double w2 = margin * margin;
        const double w = w1 * w2;
        if (w == 0.0) continue;

        acc.scatter += triangle_scatter(p1, p2, p3, p) * w;
        acc.sign_vector += ((p1 - p) + (p2 - p) + (p3 - p)) * (w / 6.0);
    }
    return acc;
}

LocalReferenceFrame compute_lrf(const LocalSurface& surface) {
    const ScatterAccumulation acc = accumulate_scatter(surface);
    const SymEigen3 eig = sym_eigen3(acc.scatter);

    if (!(eig.values[0] > 0.0) || eig.values[1] <= 1e-12 * eig.values[0])
        throw DegenerateSurfaceError("scatter matrix has rank < 2; unusable feature point");

    Vec3 v1 = eig.vectors.row(0);
    Vec3 v3 = eig.vectors.row(2);

    // Eigenvectors arrive sign-normalized (largest-magnitude component
    // positive), which doubles as the tie-break when the scatter-vector
    // projection is effectively zero.
    const double h1 = dot(acc.sign_vector, v1);
    const double h3 = dot(acc.sign_vector, v3);
    if (h1 < 0.0 && std::abs(h1) >= 1e-12) v1 = -v1;
    if (h3 < 0.0 && std::abs(h3) >= 1e-12) v3 = -v3;
    const Vec3 v2 = cross(v3, v1);

    LocalReferenceFrame lrf;
    lrf.origin = surface.center;
    lrf.axes = Mat3::from_rows(v1, v2, v3);
    lrf.eigenvalues = eig.values;
    return lrf;
}

double lrf_error_degrees(const LocalReferenceFrame& ls, const LocalReferenceFrame& lm) {
    const double radians = rotation_angle_between(ls.axes, lm.axes);
    return radians * 180.0 / std::numbers::pi;
}

} // namespace rops
