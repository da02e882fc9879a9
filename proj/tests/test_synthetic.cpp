#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rops/error.hpp"
#include "rops/mesh.hpp"
#include "rops/synthetic.hpp"
#include "support/test_support.hpp"

using namespace rops;

TEST_CASE("zero-sigma noise is the identity") {
    const TriangleMesh mesh = make_blob(1, {.subdivisions = 2});
    const TriangleMesh out = add_gaussian_noise(mesh, 0.0, 99);
    CHECK(out.vertices == mesh.vertices);
    CHECK(out.triangles == mesh.triangles);
}

TEST_CASE("noise is deterministic for a fixed seed") {
    const TriangleMesh mesh = make_blob(2, {.subdivisions = 2});
    const TriangleMesh a = add_gaussian_noise(mesh, 0.1, 1234);
    const TriangleMesh b = add_gaussian_noise(mesh, 0.1, 1234);
    CHECK(a.vertices == b.vertices); // bit-identical
    const TriangleMesh c = add_gaussian_noise(mesh, 0.1, 1235);
    CHECK(a.vertices != c.vertices);
}

TEST_CASE("noise sample stddev lands near the requested sigma") {
    const TriangleMesh mesh = make_icosphere(5); // 10242 vertices
    const double mr = mesh_resolution(mesh);
    const double sigma = 0.5;
    const TriangleMesh noisy = add_gaussian_noise(mesh, sigma, 7);

    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3 d = noisy.vertices[i] - mesh.vertices[i];
        for (double v : {d.x, d.y, d.z}) {
            sum += v;
            sum_sq += v * v;
            ++n;
        }
    }
    const double mean = sum / double(n);
    const double stddev = std::sqrt(sum_sq / double(n) - mean * mean);
    CHECK(std::abs(stddev - sigma * mr) / (sigma * mr) < 0.05);
}

TEST_CASE("decimate with fraction 1 is the identity") {
    const TriangleMesh mesh = make_blob(3, {.subdivisions = 2});
    const TriangleMesh out = decimate(mesh, 1.0);
    CHECK(out.vertices == mesh.vertices);
    CHECK(out.triangles == mesh.triangles);
}

TEST_CASE("decimate hits the requested vertex count") {
    const TriangleMesh mesh = make_blob(4, {.subdivisions = 4}); // 2562 vertices
    const TriangleMesh half = decimate(mesh, 0.5);
    const double target = 0.5 * double(mesh.vertices.size());
    CHECK(std::abs(double(half.vertices.size()) - target) / target < 0.02);
    CHECK_NOTHROW(validate_mesh(half));
    CHECK(!boundary_edges(mesh).size()); // blob is closed
}

TEST_CASE("decimating a planar grid stays planar") {
    const TriangleMesh plane = make_plane_grid(40, 40, 0.1);
    const TriangleMesh out = decimate(plane, 0.25);
    CHECK_NOTHROW(validate_mesh(out));
    const double target = 0.25 * double(plane.vertices.size());
    CHECK(std::abs(double(out.vertices.size()) - target) / target < 0.02);
    for (const Vec3& v : out.vertices) CHECK(std::abs(v.z) < 1e-6);
}

TEST_CASE("decimate rejects impossible fractions") {
    const TriangleMesh mesh = make_icosphere(1);
    CHECK_THROWS_AS(decimate(mesh, 0.00001), MeshError);
    CHECK_THROWS_AS(decimate(mesh, 0.0), MeshError);
    CHECK_THROWS_AS(decimate(mesh, 1.5), MeshError);
}

TEST_CASE("decimation preserves provenance tags") {
    TriangleMesh mesh = make_icosphere(3);
    mesh.tags.assign(mesh.vertices.size(), 7);
    const TriangleMesh out = decimate(mesh, 0.5);
    REQUIRE(out.tags.size() == out.vertices.size());
    for (int t : out.tags) CHECK(t == 7);
}

TEST_CASE("compose_scene with k=1 reproduces the model under the returned pose") {
    const TriangleMesh model = make_blob(5, {.subdivisions = 2});
    const ComposedScene scene = compose_scene({model}, 1, 42);
    REQUIRE(scene.poses.size() == 1);
    const GroundTruthPose& pose = scene.poses[0];
    REQUIRE(scene.scene.vertices.size() == model.vertices.size());
    for (size_t i = 0; i < model.vertices.size(); ++i) {
        const Vec3 expected = transform_point(model.vertices[i], pose.rotation, pose.translation);
        CHECK(scene.scene.vertices[i] == expected); // bit-level
    }
}

TEST_CASE("compose_scene vertex count is the sum of its instances") {
    std::vector<TriangleMesh> models = {make_blob(6, {.subdivisions = 2}),
                                        make_blob(7, {.subdivisions = 2}),
                                        make_blob(8, {.subdivisions = 2})};
    const ComposedScene scene = compose_scene(models, 3, 5);
    size_t total = 0;
    for (const GroundTruthPose& pose : scene.poses)
        total += models[size_t(pose.model_id)].vertices.size();
    CHECK(scene.scene.vertices.size() == total);
    CHECK(scene.scene.tags.size() == total);

    // Distinct models when k <= model count.
    CHECK(scene.poses[0].model_id != scene.poses[1].model_id);
    CHECK(scene.poses[1].model_id != scene.poses[2].model_id);
    CHECK(scene.poses[0].model_id != scene.poses[2].model_id);
}

TEST_CASE("compose_scene rotations are orthonormal over 100 seeds") {
    const TriangleMesh model = make_icosphere(1);
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const ComposedScene scene = compose_scene({model}, 1, seed);
        CHECK(is_rotation(scene.poses[0].rotation, 1e-12));
    }
}

TEST_CASE("compose_scene tags map vertices to their source model") {
    std::vector<TriangleMesh> models = {make_icosphere(1), make_icosphere(2)};
    const ComposedScene scene = compose_scene(models, 2, 11);
    size_t offset = 0;
    for (const GroundTruthPose& pose : scene.poses) {
        const size_t count = models[size_t(pose.model_id)].vertices.size();
        for (size_t i = offset; i < offset + count; ++i)
            CHECK(scene.scene.tags[i] == pose.model_id);
        offset += count;
    }

    const ComposedScene untagged = compose_scene(models, 2, 11, {.tag_vertices = false});
    CHECK(untagged.scene.tags.empty());
    CHECK(untagged.scene.vertices == scene.scene.vertices); // same geometry path
}

TEST_CASE("blob shapes are valid, closed and distinct per seed") {
    const TriangleMesh a = make_blob(100, {.subdivisions = 3});
    const TriangleMesh b = make_blob(101, {.subdivisions = 3});
    CHECK_NOTHROW(validate_mesh(a));
    CHECK(boundary_edges(a).empty());
    REQUIRE(a.vertices.size() == b.vertices.size());
    double diff = 0.0;
    for (size_t i = 0; i < a.vertices.size(); ++i) diff += norm(a.vertices[i] - b.vertices[i]);
    CHECK(diff / double(a.vertices.size()) > 0.01);
}
