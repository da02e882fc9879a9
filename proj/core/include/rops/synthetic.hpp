#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rops/mesh.hpp"

namespace rops {

/// Perturbs every vertex coordinate with i.i.d. zero-mean Gaussian noise of
/// standard deviation sigma_mr * mesh_resolution(mesh). Topology and tags
/// are unchanged; sigma_mr = 0 returns an identical copy. Deterministic for
/// a fixed seed.
TriangleMesh add_gaussian_noise(const TriangleMesh& mesh, double sigma_mr, uint64_t seed);

/// Quadric-error edge collapse down to round(target_fraction * vertices)
/// vertices. target_fraction = 1 returns the mesh unchanged. Throws
/// MeshError when fewer than 3 vertices would remain.
TriangleMesh decimate(const TriangleMesh& mesh, double target_fraction);

/// Uniformly distributed random rotation (row-vector convention).
Mat3 random_rotation(std::mt19937_64& rng);

struct ComposeOptions {
    /// Translations are drawn uniformly inside a cube with side
    /// box_factor * (largest model bounding-box diagonal).
    double box_factor = 4.0;
    /// Stamp each scene vertex with the id of its source model.
    bool tag_vertices = true;
};

struct ComposedScene {
    TriangleMesh scene;
    std::vector<GroundTruthPose> poses;
};

/// Union of k model instances under random rigid poses. Models are chosen
/// without replacement while possible, then round-robin. Scene vertices are
/// exactly apply_pose(model) vertices, so the returned poses reproduce them
/// bit-for-bit.
ComposedScene compose_scene(const std::vector<TriangleMesh>& models, int k, uint64_t seed,
                            const ComposeOptions& options = {});

// Procedural shapes for the synthetic experiments. All are deterministic.

/// Unit-ish icosphere with `subdivisions` rounds of 4-way splitting.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0);

/// Regular grid of (nx-1)*(ny-1)*2 triangles in the z=0 plane.
TriangleMesh make_plane_grid(int nx, int ny, double spacing = 1.0);

/// Closed torus grid.
TriangleMesh make_torus(int ring_segments, int tube_segments, double ring_radius,
                        double tube_radius);

/// Closed tube swept along a closed path with parallel-transport frames
/// (holonomy spread over the seam so the mesh closes cleanly).
TriangleMesh make_tube(std::span<const Vec3> path, int path_segments, int ring_segments,
                       double tube_radius);

/// Sample points of a (p, q) torus knot.
std::vector<Vec3> make_torus_knot_path(int p, int q, int samples, double scale);

struct SurfaceDetailOptions {
    int lobes = 8;
    double min_lobe_amplitude = 0.04;
    double max_lobe_amplitude = 0.12;
    double min_lobe_width = 0.25; // radians of direction deviation
    double max_lobe_width = 0.60;
    int waves = 3;
    double wave_amplitude = 0.05;
    double min_wave_frequency = 4.0;
    double max_wave_frequency = 8.0;
};

/// Random smooth bump-and-corrugation field displacing vertices radially
/// from the origin. Breaks symmetries so local patches become distinctive.
TriangleMesh displace_radial(TriangleMesh mesh, uint64_t seed,
                             const SurfaceDetailOptions& options = {});

struct BlobOptions {
    int subdivisions = 5;
    SurfaceDetailOptions detail{
        .lobes = 10,
        .min_lobe_amplitude = 0.06,
        .max_lobe_amplitude = 0.20,
        .waves = 3,
        .wave_amplitude = 0.08,
        .min_wave_frequency = 6.0,
        .max_wave_frequency = 10.0,
    };
    /// The three axis scales are {1, mid, small} in a seed-chosen order,
    /// keeping every blob clearly elongated.
    double mid_axis_min = 0.50;
    double mid_axis_max = 0.70;
    double small_axis_min = 0.35;
    double small_axis_max = 0.50;
};

/// Asymmetric closed surface: an icosphere displaced by a random bump and
/// corrugation field, then squashed anisotropically. Distinct seeds give
/// geometrically distinct objects with feature-rich local patches.
TriangleMesh make_blob(uint64_t seed, const BlobOptions& options = {});

} // namespace rops
