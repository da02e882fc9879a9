#pragma once

#include <array>

#include "rops/mesh.hpp"

namespace rops {

/// Local reference frame at a feature point: axes are the ROWS of `axes`
/// (x, y, z in world coordinates), right-handed and orthonormal. Local
/// coordinates of a world point q are (q - origin) * transpose(axes).
struct LocalReferenceFrame {
    Vec3 origin;
    Mat3 axes = Mat3::identity();
    /// Eigenvalues of the overall scatter matrix, descending.
    std::array<double, 3> eigenvalues{};

    Vec3 to_local(const Vec3& q) const { return (q - origin) * axes.transposed(); }
    Vec3 to_world(const Vec3& local) const { return local * axes + origin; }

    /// lambda1/lambda2; large values mean a well-conditioned dominant axis,
    /// values near 1 flag locally symmetric (unreliable) surfaces.
    double axis_ratio() const;
};

/// Accumulated second-moment state of a local surface: the overall scatter
/// matrix plus the weighted scatter-vector sum used for eigenvector sign
/// disambiguation.
struct ScatterAccumulation {
    Mat3 scatter;       // C, symmetric positive semi-definite
    Vec3 sign_vector;   // sum of w1*w2*(1/6)*sum_j (p_ij - p)
    double total_area = 0.0;
};

/// Area-normalized integral of (x - p)(x - p)^T over one triangle,
/// evaluated in closed form.
Mat3 triangle_scatter(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p);

/// Weighted sum over the surface triangles: each triangle scatter weighted
/// by its area ratio and the squared margin (r - |p - centroid|)^2.
/// Throws DegenerateSurfaceError when the surface has zero total area.
ScatterAccumulation accumulate_scatter(const LocalSurface& surface);

/// Unique, unambiguous LRF: eigenvectors of the overall scatter matrix with
/// signs fixed toward the majority of the point scatter; y = z cross x.
/// Throws DegenerateSurfaceError when the scatter has rank < 2.
LocalReferenceFrame compute_lrf(const LocalSurface& surface);

/// Rotation error between two frames in degrees:
/// arccos((trace(Ls * Lm^-1) - 1) / 2) * 180 / pi, clamped into [0, 180].
double lrf_error_degrees(const LocalReferenceFrame& ls, const LocalReferenceFrame& lm);

} // namespace rops
