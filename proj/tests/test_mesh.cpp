#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "rops/error.hpp"
#include "rops/mesh.hpp"
#include "rops/mesh_io.hpp"
#include "rops/synthetic.hpp"
#include "support/test_support.hpp"

using namespace rops;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "rops_mesh_tests";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

} // namespace

TEST_CASE("mesh resolution of a unit equilateral triangle is 1") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0}};
    mesh.triangles = {{0, 1, 2}};
    CHECK(mesh_resolution(mesh) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mesh resolution counts shared edges once") {
    // Two unit-edge triangles sharing an edge: 5 unique edges, all length 1.
    TriangleMesh mesh;
    const double h = std::sqrt(3.0) / 2.0;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {1.5, h, 0}};
    mesh.triangles = {{0, 1, 2}, {1, 3, 2}};
    CHECK(unique_edges(mesh).size() == 5);
    CHECK(mesh_resolution(mesh) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mesh resolution equals a brute-force mean over unique edges") {
    std::mt19937_64 rng(23);
    const TriangleMesh mesh = test::random_triangle_soup(rng, 60);

    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    double total = 0.0;
    for (const auto& [a, b] : edges) total += norm(mesh.vertices[a] - mesh.vertices[b]);
    CHECK(mesh_resolution(mesh) == doctest::Approx(total / double(edges.size())).epsilon(1e-12));
}

TEST_CASE("mesh resolution requires triangles") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}};
    CHECK_THROWS_AS(mesh_resolution(mesh), MeshError);
}

TEST_CASE("mesh resolution is rigid invariant") {
    std::mt19937_64 rng(29);
    const TriangleMesh mesh = make_blob(5, {.subdivisions = 2});
    const double base = mesh_resolution(mesh);
    for (int i = 0; i < 10; ++i) {
        const Mat3 r = random_rotation(rng);
        const Vec3 t = test::random_point(rng, -10, 10);
        const double moved = mesh_resolution(apply_pose(mesh, r, t));
        CHECK(std::abs(moved - base) / base < 1e-9);
    }
}

TEST_CASE("validate_mesh flags bad indices, repeats and non-finite coords") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.triangles = {{0, 1, 2}};
    CHECK_NOTHROW(validate_mesh(mesh));

    TriangleMesh bad = mesh;
    bad.triangles[0][2] = 3;
    CHECK_THROWS_AS(validate_mesh(bad), MeshError);

    bad = mesh;
    bad.triangles[0][1] = 0;
    CHECK_THROWS_AS(validate_mesh(bad), MeshError);

    bad = mesh;
    bad.vertices[1].y = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_mesh(bad), MeshError);
}

TEST_CASE("crop includes all triangles when radius exceeds the diameter") {
    const TriangleMesh mesh = make_icosphere(2);
    const LocalSurface s = crop_local_surface(mesh, {0.1, 0.2, 0.0}, 10.0);
    CHECK(s.triangle_ids.size() == mesh.triangles.size());
}

TEST_CASE("crop with unreachable radius reports an isolated point") {
    const TriangleMesh mesh = make_icosphere(1);
    CHECK_THROWS_AS(crop_local_surface(mesh, {100, 0, 0}, 0.5), EmptySurfaceError);
}

TEST_CASE("crop matches a brute-force membership test and the batch cropper") {
    std::mt19937_64 rng(31);
    const TriangleMesh mesh = test::random_triangle_soup(rng, 120);
    const double mr = mesh_resolution(mesh);
    const SurfaceCropper cropper(mesh);

    for (int trial = 0; trial < 25; ++trial) {
        const Vec3 p = mesh.vertices[size_t(trial * 3)];
        const double r = 15.0 * mr * 0.2;

        std::vector<int> expected;
        for (size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            bool any = false;
            for (int k = 0; k < 3; ++k)
                if (norm(mesh.vertices[tri[k]] - p) <= r) any = true;
            if (any) expected.push_back(int(t));
        }
        const LocalSurface a = crop_local_surface(mesh, p, r);
        const LocalSurface b = cropper.crop(p, r);
        CHECK(a.triangle_ids == expected);
        CHECK(b.triangle_ids == expected);
    }
}

TEST_CASE("crop triangle set is invariant under rigid motion") {
    std::mt19937_64 rng(37);
    const TriangleMesh mesh = make_blob(9, {.subdivisions = 3});
    const double r = 6.0 * mesh_resolution(mesh);
    const Vec3 p = mesh.vertices[100];
    const auto base = crop_local_surface(mesh, p, r).triangle_ids;
    for (int i = 0; i < 5; ++i) {
        const Mat3 rot = random_rotation(rng);
        const Vec3 t = test::random_point(rng, -4, 4);
        const auto moved =
            crop_local_surface(apply_pose(mesh, rot, t), transform_point(p, rot, t), r)
                .triangle_ids;
        CHECK(moved == base);
    }
}

TEST_CASE("boundary detection: closed sphere has none, a grid has a rim") {
    CHECK(boundary_edges(make_icosphere(2)).empty());
    const TriangleMesh plane = make_plane_grid(6, 6);
    CHECK(!boundary_edges(plane).empty());
    const auto mask = boundary_vertex_mask(plane);
    // Corners are boundary vertices; the middle of the grid is not.
    CHECK(mask[0] == 1);
    CHECK(mask[2 * 6 + 2] == 0);
}

// --- mesh I/O ---------------------------------------------------------------

TEST_CASE("ascii ply with a single face loads") {
    const auto path = temp_dir() / "tri.ply";
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
               "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const TriangleMesh mesh = load_mesh(path.string());
    CHECK(mesh.vertices.size() == 3);
    CHECK(mesh.triangles.size() == 1);
}

TEST_CASE("ply quad faces are fan-triangulated") {
    const auto path = temp_dir() / "quad.ply";
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 4\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
               "0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    const TriangleMesh mesh = load_mesh(path.string());
    CHECK(mesh.triangles.size() == 2);
    CHECK(mesh.triangles[0] == std::array<int, 3>{0, 1, 2});
    CHECK(mesh.triangles[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("truncated binary ply is a parse error") {
    const auto path = temp_dir() / "trunc.ply";
    std::string header =
        "ply\nformat binary_little_endian 1.0\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
    header += std::string(10, '\0'); // far fewer than 3*12 + face bytes
    write_file(path, header);
    CHECK_THROWS_AS(load_mesh(path.string()), ParseError);
}

TEST_CASE("empty ply is an error") {
    const auto path = temp_dir() / "empty.ply";
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 0\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 0\nproperty list uchar int vertex_indices\nend_header\n");
    CHECK_THROWS_AS(load_mesh(path.string()), ParseError);
}

TEST_CASE("ply round trip preserves geometry in both formats") {
    const TriangleMesh mesh = make_blob(3, {.subdivisions = 2});

    const auto ascii_path = temp_dir() / "blob_ascii.ply";
    save_ply(mesh, ascii_path.string(), PlyFormat::Ascii);
    const TriangleMesh ascii_back = load_mesh(ascii_path.string());
    REQUIRE(ascii_back.vertices.size() == mesh.vertices.size());
    CHECK(ascii_back.triangles == mesh.triangles);
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(norm(ascii_back.vertices[i] - mesh.vertices[i]) == 0.0); // %.17g is lossless

    const auto bin_path = temp_dir() / "blob_bin.ply";
    save_ply(mesh, bin_path.string(), PlyFormat::BinaryLittleEndian);
    const TriangleMesh bin_back = load_mesh(bin_path.string());
    REQUIRE(bin_back.vertices.size() == mesh.vertices.size());
    CHECK(bin_back.triangles == mesh.triangles);
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(norm(bin_back.vertices[i] - mesh.vertices[i]) < 1e-6); // float32 storage
}

TEST_CASE("ply reader skips unknown vertex properties") {
    const auto path = temp_dir() / "extra.ply";
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\n"
               "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
               "0 0 0 255\n1 0 0 4\n0 1 0 0\n3 0 1 2\n");
    const TriangleMesh mesh = load_mesh(path.string());
    CHECK(mesh.vertices[1].x == 1.0);
}

TEST_CASE("obj loads v/f records with fans, slashes and negative indices") {
    const auto path = temp_dir() / "quad.obj";
    write_file(path,
               "# comment\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
               "vn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -3 -2\n");
    const TriangleMesh mesh = load_mesh(path.string());
    CHECK(mesh.vertices.size() == 4);
    CHECK(mesh.triangles.size() == 3); // quad fan (2) + explicit tri (1)
    CHECK(mesh.triangles[2] == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("ground truth poses survive a json round trip") {
    std::mt19937_64 rng(41);
    std::vector<GroundTruthPose> poses;
    for (int i = 0; i < 3; ++i)
        poses.push_back({i, random_rotation(rng), test::random_point(rng, -3, 3)});
    const auto path = temp_dir() / "gt.json";
    save_ground_truth(poses, path.string());
    const auto back = load_ground_truth(path.string());
    REQUIRE(back.size() == poses.size());
    for (size_t i = 0; i < poses.size(); ++i) {
        CHECK(back[i].model_id == poses[i].model_id);
        CHECK(frobenius_norm(back[i].rotation + poses[i].rotation * -1.0) < 1e-15);
        CHECK(norm(back[i].translation - poses[i].translation) < 1e-15);
    }
}

TEST_CASE("malformed ground truth json is a parse error") {
    const auto path = temp_dir() / "bad_gt.json";
    write_file(path, "{\"not\": \"an array\"}");
    CHECK_THROWS_AS(load_ground_truth(path.string()), ParseError);
    write_file(path, "[{\"model_id\": 0, \"R\": [1,2], \"t\": [0,0,0]}]");
    CHECK_THROWS_AS(load_ground_truth(path.string()), ParseError);
}
