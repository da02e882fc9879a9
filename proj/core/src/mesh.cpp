#include "rops/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_set>

#include "rops/error.hpp"
#include "rops/kdtree.hpp"

namespace rops {

void validate_mesh(const TriangleMesh& mesh) {
    const int n = int(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            throw MeshError("mesh has non-finite vertex coordinates");
    }
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= n)
                throw MeshError("triangle " + std::to_string(t) + " has out-of-range vertex index");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex index");
    }
    if (!mesh.tags.empty() && mesh.tags.size() != mesh.vertices.size())
        throw MeshError("per-vertex tag array size mismatch");
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

double mesh_surface_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles)
        area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    return area;
}

std::vector<std::pair<int, int>> unique_edges(const TriangleMesh& mesh) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

double mesh_resolution(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) throw MeshError("mesh resolution requires at least one triangle");
    const auto edges = unique_edges(mesh);
    double sum = 0.0;
    for (const auto& [a, b] : edges) sum += norm(mesh.vertices[a] - mesh.vertices[b]);
    return sum / double(edges.size());
}

Aabb mesh_bounds(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw MeshError("bounds of an empty mesh");
    Aabb box{mesh.vertices[0], mesh.vertices[0]};
    for (const Vec3& v : mesh.vertices) {
        box.min.x = std::min(box.min.x, v.x);
        box.min.y = std::min(box.min.y, v.y);
        box.min.z = std::min(box.min.z, v.z);
        box.max.x = std::max(box.max.x, v.x);
        box.max.y = std::max(box.max.y, v.y);
        box.max.z = std::max(box.max.z, v.z);
    }
    return box;
}

double mesh_diameter(const TriangleMesh& mesh) {
    const Aabb box = mesh_bounds(mesh);
    return norm(box.max - box.min);
}

std::vector<std::vector<int>> vertex_triangle_adjacency(const TriangleMesh& mesh) {
    std::vector<std::vector<int>> adj(mesh.vertices.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t)
        for (int k = 0; k < 3; ++k) adj[mesh.triangles[t][k]].push_back(int(t));
    return adj;
}

std::vector<std::pair<int, int>> boundary_edges(const TriangleMesh& mesh) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<std::pair<int, int>> out;
    size_t i = 0;
    while (i < edges.size()) {
        size_t j = i + 1;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if (j - i == 1) out.push_back(edges[i]);
        i = j;
    }
    return out;
}

std::vector<uint8_t> boundary_vertex_mask(const TriangleMesh& mesh) {
    std::vector<uint8_t> mask(mesh.vertices.size(), 0);
    for (const auto& [a, b] : boundary_edges(mesh)) {
        mask[a] = 1;
        mask[b] = 1;
    }
    return mask;
}

std::vector<int> LocalSurface::vertex_ids() const {
    std::vector<int> ids;
    ids.reserve(triangle_ids.size() * 3);
    for (int t : triangle_ids)
        for (int k = 0; k < 3; ++k) ids.push_back(mesh->triangles[t][k]);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

LocalSurface crop_local_surface(const TriangleMesh& mesh, const Vec3& center, double radius) {
    if (radius <= 0.0) throw MeshError("crop radius must be positive");
    LocalSurface surface{&mesh, center, radius, {}};
    const double sq_radius = radius * radius;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (squared_norm(mesh.vertices[tri[k]] - center) <= sq_radius) {
                surface.triangle_ids.push_back(int(t));
                break;
            }
        }
    }
    if (surface.triangle_ids.empty())
        throw EmptySurfaceError("no triangle within the support radius; isolated point");
    return surface;
}

struct SurfaceCropper::Impl {
    const TriangleMesh* mesh;
    KdTree tree;
    std::vector<std::vector<int>> adjacency;
};

SurfaceCropper::SurfaceCropper(const TriangleMesh& mesh)
    : impl_(std::make_unique<Impl>(Impl{&mesh, KdTree::from_points(mesh.vertices),
                                        vertex_triangle_adjacency(mesh)})) {}

SurfaceCropper::~SurfaceCropper() = default;
SurfaceCropper::SurfaceCropper(SurfaceCropper&&) noexcept = default;
SurfaceCropper& SurfaceCropper::operator=(SurfaceCropper&&) noexcept = default;

LocalSurface SurfaceCropper::crop(const Vec3& center, double radius) const {
    if (radius <= 0.0) throw MeshError("crop radius must be positive");
    LocalSurface surface{impl_->mesh, center, radius, {}};
    const auto inside = impl_->tree.radius_indices(center, radius);
    for (int v : inside)
        for (int t : impl_->adjacency[v]) surface.triangle_ids.push_back(t);
    std::sort(surface.triangle_ids.begin(), surface.triangle_ids.end());
    surface.triangle_ids.erase(
        std::unique(surface.triangle_ids.begin(), surface.triangle_ids.end()),
        surface.triangle_ids.end());
    if (surface.triangle_ids.empty())
        throw EmptySurfaceError("no triangle within the support radius; isolated point");
    return surface;
}

TriangleMesh apply_pose(const TriangleMesh& mesh, const Mat3& rotation, const Vec3& translation) {
    TriangleMesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.vertices.push_back(transform_point(v, rotation, translation));
    out.triangles = mesh.triangles;
    out.tags = mesh.tags;
    return out;
}

} // namespace rops
