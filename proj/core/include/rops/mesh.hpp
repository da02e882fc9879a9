#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "rops/geometry.hpp"

namespace rops {

/// Indexed triangle soup. Immutable by convention once built: every
/// operation in this library returns a new mesh instead of mutating, so a
/// mesh can be shared freely across worker threads.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    /// Optional per-vertex provenance tag (source model id) for synthetic
    /// scenes; empty when unused, otherwise one entry per vertex.
    std::vector<int> tags;

    bool empty() const { return vertices.empty() || triangles.empty(); }
    size_t vertex_count() const { return vertices.size(); }
    size_t triangle_count() const { return triangles.size(); }
};

/// Throws MeshError unless all triangle indices are in range, no triangle
/// repeats a vertex index, and all coordinates are finite.
void validate_mesh(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double mesh_surface_area(const TriangleMesh& mesh);

/// Unique undirected edges as (low, high) index pairs, sorted.
std::vector<std::pair<int, int>> unique_edges(const TriangleMesh& mesh);

/// Mesh resolution (mr): mean length over the set of unique edges.
/// The unit used throughout for support radii, noise levels and thresholds.
double mesh_resolution(const TriangleMesh& mesh);

struct Aabb {
    Vec3 min;
    Vec3 max;
};
Aabb mesh_bounds(const TriangleMesh& mesh);

/// Bounding-box diagonal length.
double mesh_diameter(const TriangleMesh& mesh);

/// Per-vertex list of incident triangle ids.
std::vector<std::vector<int>> vertex_triangle_adjacency(const TriangleMesh& mesh);

/// Edges incident to exactly one triangle.
std::vector<std::pair<int, int>> boundary_edges(const TriangleMesh& mesh);

/// Flags vertices lying on at least one boundary edge.
std::vector<uint8_t> boundary_vertex_mask(const TriangleMesh& mesh);

/// The part of a mesh caught by a sphere of radius `radius` around
/// `center`: all triangles with at least one vertex inside the sphere,
/// kept whole (no clipping). Holds a pointer into the parent mesh, which
/// must outlive the surface.
struct LocalSurface {
    const TriangleMesh* mesh = nullptr;
    Vec3 center;
    double radius = 0.0;
    std::vector<int> triangle_ids;

    /// Unique vertex ids of the included triangles, ascending.
    std::vector<int> vertex_ids() const;
};

/// Throws EmptySurfaceError when no triangle is within reach.
LocalSurface crop_local_surface(const TriangleMesh& mesh, const Vec3& center, double radius);

/// Batch cropper: one vertex k-d tree + adjacency shared by many crops.
/// Read-only over the mesh, safe for concurrent crop() calls.
class SurfaceCropper {
public:
    explicit SurfaceCropper(const TriangleMesh& mesh);
    ~SurfaceCropper();
    SurfaceCropper(SurfaceCropper&&) noexcept;
    SurfaceCropper& operator=(SurfaceCropper&&) noexcept;

    LocalSurface crop(const Vec3& center, double radius) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Rigid pose with row-vector convention: q_scene = q_model * R + t.
struct GroundTruthPose {
    int model_id = -1;
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
};

/// Applies a pose to every vertex; topology and tags carried over.
/// Uses transform_point() for each vertex, so applying a returned
/// ground-truth pose reproduces composed scene vertices bit-exactly.
TriangleMesh apply_pose(const TriangleMesh& mesh, const Mat3& rotation, const Vec3& translation);

} // namespace rops
