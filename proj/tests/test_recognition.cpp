#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <numbers>
#include <random>

#include "rops/error.hpp"
#include "rops/experiments.hpp"
#include "rops/library_io.hpp"
#include "rops/recognition.hpp"
#include "rops/synthetic.hpp"
#include "support/test_support.hpp"

using namespace rops;
namespace fs = std::filesystem;

namespace {

RopsParams test_params() { return {}; }

const std::vector<NamedMesh>& suite_models() {
    static const std::vector<NamedMesh> suite = experiment_model_suite();
    return suite;
}

ModelLibrary small_library() {
    // trefoil + torus from the experiment suite
    std::vector<NamedMesh> models = {suite_models()[0], suite_models()[2]};
    return build_model_library(models, 150, test_params());
}

} // namespace

TEST_CASE("library build: one seed gives one feature; rho=0 keeps all seeds") {
    std::vector<NamedMesh> models;
    models.push_back({"torus", suite_models()[2].mesh});

    const ModelLibrary one = build_model_library(models, 1, test_params());
    CHECK(one.models[0].features.size() == 1);

    LibraryBuildOptions no_control;
    no_control.resolution_control_rho_mr = 0.0;
    const ModelLibrary all = build_model_library(models, 50, test_params(), no_control);
    CHECK(all.models[0].features.size() + size_t(all.models[0].degenerate_skipped) == 50);
}

TEST_CASE("library rejects models with too few vertices") {
    std::vector<NamedMesh> models;
    models.push_back({"tiny", make_icosphere(0)}); // 12 vertices
    CHECK_THROWS_AS(build_model_library(models, 200, test_params()), MeshError);
}

TEST_CASE("library round-trips through the binary container field by field") {
    const ModelLibrary lib = small_library();
    const auto path = fs::temp_directory_path() / "rops_lib_test.bin";
    save_library(lib, path.string());
    const ModelLibrary back = load_library(path.string());

    CHECK(back.params == lib.params);
    REQUIRE(back.models.size() == lib.models.size());
    for (size_t m = 0; m < lib.models.size(); ++m) {
        CHECK(back.models[m].name == lib.models[m].name);
        REQUIRE(back.models[m].features.size() == lib.models[m].features.size());
        for (size_t f = 0; f < lib.models[m].features.size(); ++f) {
            const auto& a = lib.models[m].features[f];
            const auto& b = back.models[m].features[f];
            CHECK(a.position == b.position); // bit-exact doubles
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(a.lrf.axes.m[i][j] == b.lrf.axes.m[i][j]);
            CHECK(a.lrf.eigenvalues == b.lrf.eigenvalues);
            CHECK(a.descriptor == b.descriptor);
        }
    }

    // Corrupted magic is a version error.
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTALIB!";
    }
    CHECK_THROWS_AS(load_library(path.string()), ConfigError);
}

TEST_CASE("attach_meshes restores resolutions and validates names") {
    const ModelLibrary lib = small_library();
    const auto path = fs::temp_directory_path() / "rops_lib_attach.bin";
    save_library(lib, path.string());
    ModelLibrary loaded = load_library(path.string());
    CHECK(!loaded.meshes_attached());

    std::vector<NamedMesh> wrong;
    wrong.push_back({"nope", make_icosphere(1)});
    CHECK_THROWS_AS(attach_meshes(loaded, wrong), ConfigError);

    std::vector<NamedMesh> right = {suite_models()[0], suite_models()[2]};
    attach_meshes(loaded, right);
    CHECK(loaded.meshes_attached());
    CHECK(loaded.reference_resolution() == doctest::Approx(lib.reference_resolution()));
}

TEST_CASE("hypothesize: identical frames give the identity transform") {
    const TriangleMesh& mesh = suite_models()[2].mesh;
    const double r = 15.0 * mesh_resolution(mesh);
    const LocalReferenceFrame lrf = compute_lrf(crop_local_surface(mesh, mesh.vertices[5], r));
    const TransformHypothesis h =
        hypothesize(mesh.vertices[5], lrf, mesh.vertices[5], lrf);
    CHECK(frobenius_norm(h.rotation + Mat3::identity() * -1.0) < 1e-12);
    CHECK(norm(h.translation) < 1e-12);
}

TEST_CASE("hypothesize recovers exact rigid motions from recomputed LRFs") {
    std::mt19937_64 rng(131);
    const TriangleMesh& mesh = suite_models()[2].mesh;
    const double r = 15.0 * mesh_resolution(mesh);
    const double diameter = mesh_diameter(mesh);

    int trials = 0;
    for (int v = 40; trials < 25 && v < int(mesh.vertices.size()); v += 97) {
        const Vec3 p = mesh.vertices[size_t(v)];
        LocalReferenceFrame lrf_model;
        try {
            lrf_model = compute_lrf(crop_local_surface(mesh, p, r));
        } catch (const DegenerateSurfaceError&) {
            continue;
        }
        if (lrf_model.axis_ratio() < 1.05) continue;
        ++trials;

        const Mat3 r0 = random_rotation(rng);
        const Vec3 t0 = test::random_point(rng, -3, 3);
        const TriangleMesh scene = apply_pose(mesh, r0, t0);
        const Vec3 p_scene = transform_point(p, r0, t0);
        const LocalReferenceFrame lrf_scene =
            compute_lrf(crop_local_surface(scene, p_scene, r));

        const TransformHypothesis h = hypothesize(p_scene, lrf_scene, p, lrf_model);
        CHECK(rotation_angle_between(h.rotation, r0) < 1e-6);
        CHECK(norm(h.translation - t0) < 1e-9 * diameter);

        // Frame alignment property: Fm * R == Fs.
        CHECK(frobenius_norm(lrf_model.axes * h.rotation + lrf_scene.axes * -1.0) < 1e-6);
        CHECK(norm(transform_point(p, h.rotation, h.translation) - p_scene) < 1e-9 * diameter);
    }
    CHECK(trials == 25);
}

TEST_CASE("hypothesize alignment identity on random orthonormal frames") {
    std::mt19937_64 rng(137);
    for (int i = 0; i < 100; ++i) {
        LocalReferenceFrame fs, fm;
        fs.axes = random_rotation(rng);
        fm.axes = random_rotation(rng);
        fs.origin = test::random_point(rng, -5, 5);
        fm.origin = test::random_point(rng, -5, 5);
        const TransformHypothesis h = hypothesize(fs.origin, fs, fm.origin, fm);
        CHECK(frobenius_norm(fm.axes * h.rotation + fs.axes * -1.0) < 1e-9);
        CHECK(norm(transform_point(fm.origin, h.rotation, h.translation) - fs.origin) < 1e-9);
        CHECK(is_rotation(h.rotation, 1e-9));
    }
}

TEST_CASE("clustering: a single hypothesis forms its own cluster") {
    TransformHypothesis h;
    h.rotation = rotation_about_axis(1, 0.3);
    h.translation = {1, 2, 3};
    h.feature_distance = 0.5;
    const auto clusters = cluster_hypotheses({h}, 0.2, 1.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].support == 1);
    CHECK(rotation_angle_between(clusters[0].rotation, h.rotation) < 1e-9);
    CHECK(norm(clusters[0].translation - h.translation) < 1e-12);
}

TEST_CASE("clustering: repeated transform dominates, outlier pruned by half-max rule") {
    std::mt19937_64 rng(139);
    const Mat3 base_r = random_rotation(rng);
    const Vec3 base_t{0.5, -0.5, 1.0};

    std::vector<TransformHypothesis> hyps;
    for (int i = 0; i < 10; ++i) {
        TransformHypothesis h;
        h.rotation = base_r;
        h.translation = base_t;
        h.feature_distance = 1.0;
        hyps.push_back(h);
    }
    TransformHypothesis outlier;
    outlier.rotation = base_r * rotation_about_axis(0, 1.5);
    outlier.translation = base_t + Vec3{50, 0, 0};
    outlier.feature_distance = 1.0;
    hyps.push_back(outlier);

    const auto clusters = cluster_hypotheses(hyps, 0.2, 1.0);
    REQUIRE(!clusters.empty());
    CHECK(clusters[0].support == 10);
    // outlier cluster scores 1/1 = 1 < 10/2: pruned
    CHECK(clusters.size() == 1);
    for (const auto& c : clusters) CHECK(c.score >= clusters[0].score / 2.0);
}

TEST_CASE("clustering: perturbations within bounds land in one selected cluster") {
    std::mt19937_64 rng(149);
    const Mat3 base_r = random_rotation(rng);
    const Vec3 base_t{2.0, 0.0, -1.0};
    const Vec3 base_euler = euler_zyx_from_rotation(base_r);

    std::vector<TransformHypothesis> hyps;
    std::uniform_real_distribution<double> jitter(-0.03, 0.03);
    for (int i = 0; i < 40; ++i) {
        TransformHypothesis h;
        const Vec3 e = base_euler + Vec3{jitter(rng), jitter(rng), jitter(rng)};
        h.rotation = rotation_from_euler_zyx(e);
        h.translation = base_t + Vec3{jitter(rng), jitter(rng), jitter(rng)};
        h.feature_distance = 1.0;
        hyps.push_back(h);
    }
    const auto clusters = cluster_hypotheses(hyps, 0.2, 1.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].support == 40);
    CHECK(rotation_angle_between(clusters[0].rotation, base_r) < 0.08);
}

TEST_CASE("icp: identical scene with identity initial gives zero residual") {
    const TriangleMesh model = make_blob(230, {.subdivisions = 3});
    (void)model;
    const IcpResult res = icp_refine(model, model, Mat3::identity(), {});
    CHECK(res.epsilon_mr == doctest::Approx(0.0));
    CHECK(rotation_angle_between(res.rotation, Mat3::identity()) < 1e-12);
}

TEST_CASE("icp converges from a 5-degree, 5-mr initial offset") {
    std::mt19937_64 rng(151);
    const TriangleMesh& model = suite_models()[3].mesh;
    const double mr = mesh_resolution(model);

    for (int trial = 0; trial < 5; ++trial) {
        const Mat3 r0 = random_rotation(rng);
        const Vec3 t0 = test::random_point(rng, -2, 2);
        const TriangleMesh scene = apply_pose(model, r0, t0);

        // Perturb the pose by ~5 degrees and ~5 mr.
        const Mat3 r_init = rotation_about_axis(trial % 3, 5.0 * std::numbers::pi / 180.0) * r0;
        const Vec3 t_init = t0 + Vec3{3.0 * mr, -3.0 * mr, 2.0 * mr};

        IcpOptions opts;
        // The default stop rule (50 iterations, 1e-4 mr residual change) can
        // trigger on a mid-trajectory plateau; the convergence trial wants
        // the asymptote, so run the op with a tighter stop.
        opts.max_iterations = 400;
        opts.convergence_tol_mr = 1e-6;
        const IcpResult res = icp_refine(scene, model, r_init, t_init, opts);
        CHECK(rotation_angle_between(res.rotation, r0) < 0.5 * std::numbers::pi / 180.0);
        CHECK(norm(res.translation - t0) < 0.5 * mr);
        CHECK(res.epsilon_mr < 0.5);
    }
}

TEST_CASE("icp reports the +inf sentinel when the initial pose is hopeless") {
    const TriangleMesh model = make_blob(232, {.subdivisions = 2});
    const TriangleMesh scene = apply_pose(model, Mat3::identity(), {1000.0, 0.0, 0.0});
    const IcpResult res = icp_refine(scene, model, Mat3::identity(), {});
    CHECK(std::isinf(res.epsilon_mr));
    CHECK(rotation_angle_between(res.rotation, Mat3::identity()) < 1e-12);
    CHECK(norm(res.translation) == 0.0);
}

TEST_CASE("occlusion: full scene 0, empty scene 1, half scene about a half") {
    // Plain torus: a plane cut through its center keeps exactly half the
    // area, and the cut perimeter (two tube circles) is short, so the
    // 2-mr correspondence band stays well under the 0.05 tolerance.
    const TriangleMesh model = make_torus(160, 60, 1.0, 0.35);
    GroundTruthPose identity;

    CHECK(occlusion(model, model, identity).occlusion == doctest::Approx(0.0));

    TriangleMesh empty;
    CHECK(occlusion(model, empty, identity).occlusion == doctest::Approx(1.0));

    // Scene = triangles whose centroid lies in the x > 0 half-space.
    TriangleMesh half;
    std::vector<int> remap(model.vertices.size(), -1);
    for (const auto& tri : model.triangles) {
        const Vec3 c = (model.vertices[tri[0]] + model.vertices[tri[1]] +
                        model.vertices[tri[2]]) / 3.0;
        if (c.x <= 0.0) continue;
        std::array<int, 3> mapped;
        for (int k = 0; k < 3; ++k) {
            if (remap[size_t(tri[k])] < 0) {
                remap[size_t(tri[k])] = int(half.vertices.size());
                half.vertices.push_back(model.vertices[size_t(tri[k])]);
            }
            mapped[size_t(k)] = remap[size_t(tri[k])];
        }
        half.triangles.push_back(mapped);
    }
    const OcclusionResult res = occlusion(model, half, identity);
    CHECK(res.occlusion + res.visible_fraction == doctest::Approx(1.0));
    CHECK(std::abs(res.occlusion - 0.5) < 0.05);
}

TEST_CASE("detect_scene_features: flat plane yields almost nothing") {
    const TriangleMesh plane = make_plane_grid(60, 60, 1.0);
    DetectOptions opts;
    opts.support_radius = 8.0 * mesh_resolution(plane);
    const auto features = detect_scene_features(plane, opts);
    // Boundary rejection plus the symmetry filter should kill everything
    // (interior patches are rotationally symmetric disks).
    CHECK(features.size() <= 2);
}

TEST_CASE("detect_scene_features: closed sphere loses nothing to the boundary check") {
    const TriangleMesh sphere = make_icosphere(3);
    DetectOptions opts;
    opts.support_radius = 6.0 * mesh_resolution(sphere);
    opts.tau_lambda = 0.0; // disable the symmetry filter; spheres are symmetric
    const auto features = detect_scene_features(sphere, opts);
    CHECK(!features.empty());

    // With the filter at its default, the symmetric sphere is rejected.
    DetectOptions strict = opts;
    strict.tau_lambda = 1.2;
    CHECK(detect_scene_features(sphere, strict).size() <= features.size() / 4);
}

TEST_CASE("detect_scene_features is deterministic") {
    const TriangleMesh& blob = suite_models()[2].mesh;
    DetectOptions opts;
    opts.support_radius = 15.0 * mesh_resolution(blob);
    const auto a = detect_scene_features(blob, opts);
    const auto b = detect_scene_features(blob, opts);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].vertex_id == b[i].vertex_id);
    CHECK(a.size() > 20);
}

TEST_CASE("verify_and_segment accepts a perfect hypothesis and labels the scene") {
    const ModelLibrary lib = small_library();
    const TriangleMesh& model = lib.models[0].mesh;
    const TriangleMesh scene = model; // identity pose

    HypothesisCluster cluster;
    cluster.rotation = Mat3::identity();
    cluster.translation = {};
    cluster.support = 1;
    cluster.mean_distance = 1.0;
    cluster.score = 1.0;

    CandidateHypotheses cand;
    cand.model_id = 0;
    cand.clusters = {cluster};

    VerifyOptions opts;
    opts.min_scene_points = 10;
    const RecognitionResult res = verify_and_segment(scene, lib, {cand}, opts);
    REQUIRE(res.instances.size() == 1);
    CHECK(res.instances[0].epsilon_mr == doctest::Approx(0.0));
    CHECK(res.instances[0].alpha == doctest::Approx(1.0));
    long labeled = 0;
    for (int l : res.segmentation)
        if (l == 0) ++labeled;
    CHECK(labeled == long(scene.vertices.size()));
}

TEST_CASE("verify_and_segment rejects a pose failing both threshold branches") {
    const ModelLibrary lib = small_library();
    const TriangleMesh& model = lib.models[0].mesh;
    // Scene far away: ICP cannot bring epsilon below the thresholds from a
    // hopeless initial pose, so nothing is accepted.
    const TriangleMesh scene = apply_pose(model, Mat3::identity(), {100.0, 0.0, 0.0});

    HypothesisCluster cluster;
    cluster.rotation = Mat3::identity();
    cluster.translation = {};
    cluster.support = 1;
    cluster.mean_distance = 1.0;
    cluster.score = 1.0;
    CandidateHypotheses cand;
    cand.model_id = 0;
    cand.clusters = {cluster};

    VerifyOptions opts;
    opts.min_scene_points = 10;
    const RecognitionResult res = verify_and_segment(scene, lib, {cand}, opts);
    CHECK(res.instances.empty());
    for (int l : res.segmentation) CHECK(l == -1);
}

TEST_CASE("recognize finds an exact copy of a library model") {
    const ModelLibrary lib = small_library();
    const TriangleMesh scene = lib.models[1].mesh;

    RecognitionParams params;
    params.verify.min_scene_points = 10;
    const RecognitionResult res = recognize(scene, lib, params);
    REQUIRE(!res.instances.empty());
    CHECK(res.instances[0].model_id == 1);
    CHECK(rotation_angle_between(res.instances[0].rotation, Mat3::identity()) < 1e-3);
    CHECK(norm(res.instances[0].translation) < 1e-3);

    // No false instances of the other model.
    for (const auto& inst : res.instances) CHECK(inst.model_id == 1);
}

TEST_CASE("recognize returns an empty result for a scene of unknown geometry") {
    const ModelLibrary lib = small_library();
    const TriangleMesh stranger = make_plane_grid(70, 70, mesh_resolution(lib.models[0].mesh));
    RecognitionParams params;
    params.verify.min_scene_points = 10;
    const RecognitionResult res = recognize(stranger, lib, params);
    CHECK(res.instances.empty());
}

TEST_CASE("recognition result serializes to the documented json shape") {
    RecognitionResult res;
    RecognizedInstance inst;
    inst.model_id = 0;
    inst.model_name = "blob_a";
    inst.epsilon_mr = 0.25;
    inst.alpha = 0.9;
    res.instances.push_back(inst);
    res.segmentation = {0, 0, -1};

    const std::string json = recognition_result_to_json(res);
    CHECK(json.find("\"instances\"") != std::string::npos);
    CHECK(json.find("\"model\":\"blob_a\"") != std::string::npos);
    CHECK(json.find("\"epsilon_mr\"") != std::string::npos);
    CHECK(json.find("\"segmentation\":[0,0,-1]") != std::string::npos);
}

TEST_CASE("pose_errors and evaluate_recognition do greedy one-to-one matching") {
    const ModelLibrary lib = small_library();
    GroundTruthPose gt;
    gt.model_id = 0;
    gt.rotation = rotation_about_axis(2, 0.5);
    gt.translation = {1, 0, 0};

    RecognizedInstance inst;
    inst.model_id = 0;
    inst.rotation = gt.rotation;
    inst.translation = gt.translation;

    RecognitionResult res;
    res.instances = {inst, inst}; // a duplicate: one match + one false positive
    const SceneEvaluation eval = evaluate_recognition(res, {gt}, lib, 5.0, 5.0);
    CHECK(eval.expected == 1);
    CHECK(eval.recognized == 1);
    CHECK(eval.false_positives == 1);

    // Clutter poses (model_id < 0) are not expected.
    GroundTruthPose clutter = gt;
    clutter.model_id = -1;
    const SceneEvaluation eval2 = evaluate_recognition(res, {gt, clutter}, lib, 5.0, 5.0);
    CHECK(eval2.expected == 1);
}
