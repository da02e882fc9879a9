#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rops/recognition.hpp"
#include "rops/synthetic.hpp"

namespace rops {

// Evaluation protocols shared by the command-line tool and the test
// harness. Nuisance magnitudes (noise sigma, radii, tolerances) are given
// in units of the ORIGINAL model resolution; scene-side seed thinning is
// the only step tied to the scene's own resolution.

/// Four deterministic desk-scale objects (two knotted tubes, a bumpy
/// torus, an elongated blob) with feature-rich, locally asymmetric
/// surfaces. These are the models shipped under data/ and used by the
/// experiment suites.
std::vector<NamedMesh> experiment_model_suite();

/// A fifth object outside the suite, for clutter/distractor experiments.
TriangleMesh experiment_distractor();

struct LrfErrorOptions {
    double decimation = 0.5;
    double noise_sigma_mr = 0.1;      // in model mr
    int pairs = 1000;
    uint64_t seed = 1;
    double support_radius_mr = 15.0;  // in model mr
    double max_correspondence_mr = 2.0;
};

struct LrfErrorResult {
    std::array<long, 18> histogram{}; // 10-degree bins, [0,10), ..., [170,180]
    long used_pairs = 0;
    long skipped_pairs = 0; // no scene correspondent within the cutoff
    long failed_pairs = 0;  // degenerate LRF on either side
    double fraction_below_10deg = 0.0;

    void merge(const LrfErrorResult& other);
};

/// LRF repeatability protocol: a scene is the model decimated and
/// perturbed with Gaussian noise; random model points are paired with
/// their nearest scene points and the frame rotation error is binned.
LrfErrorResult lrf_error_experiment(const TriangleMesh& model, const LrfErrorOptions& options);

void save_lrf_histogram_csv(const LrfErrorResult& result, const std::string& path);

struct RpExperimentOptions {
    RopsParams rops;
    int feature_points_per_model = 1000;
    int scene_models = 3;             // instances composed into the scene
    double noise_sigma_mr = 0.0;      // in model mr
    double decimation = 1.0;
    double max_correspondence_mr = 2.0;
    double location_tolerance_mr = 2.0;
    std::vector<double> thresholds;   // empty: 0.05, 0.10, ..., 1.00
    uint64_t seed = 1;
};

struct RpExperimentResult {
    std::vector<RPCurvePoint> points; // merged over all model instances
    long descriptor_pairs = 0;
};

/// Descriptor-quality protocol: compose a synthetic scene with known
/// poses, apply nuisances, describe corresponding point pairs on model and
/// scene, and sweep the ratio-test threshold into an RP curve.
RpExperimentResult rp_experiment(const std::vector<TriangleMesh>& models,
                                 const RpExperimentOptions& options);

/// Same protocol over an existing scene with known poses (model_id indexes
/// into `models`). Nuisances are assumed already applied to the scene.
RpExperimentResult rp_experiment_on_scene(const std::vector<TriangleMesh>& models,
                                          const TriangleMesh& scene,
                                          const std::vector<GroundTruthPose>& poses,
                                          const RpExperimentOptions& options);

std::vector<double> default_ratio_thresholds();

struct PoseErrors {
    double rotation_deg = 0.0;
    double translation_mr = 0.0;
};

/// Rotation angle and translation distance between an accepted instance
/// and a ground-truth pose, translation in units of the model resolution.
PoseErrors pose_errors(const RecognizedInstance& instance, const GroundTruthPose& gt,
                       double model_resolution);

struct SceneEvaluation {
    int expected = 0;
    int recognized = 0;
    int false_positives = 0;
    std::vector<PoseErrors> matched_errors;
};

/// Greedy one-to-one matching of accepted instances to ground-truth poses
/// (library model ids; poses with model_id < 0 count as clutter and are
/// never expected). An instance matches when the model agrees and both
/// pose errors are inside the tolerances; unmatched instances are false
/// positives.
SceneEvaluation evaluate_recognition(const RecognitionResult& result,
                                     const std::vector<GroundTruthPose>& gt,
                                     const ModelLibrary& library, double rot_tolerance_deg,
                                     double trans_tolerance_mr);

struct RecognitionBatchOptions {
    int scenes = 10;
    int instances_per_scene = 3;
    double noise_sigma_mr = 0.0; // in library reference mr
    double decimation = 1.0;
    uint64_t seed = 1;
    double rot_tolerance_deg = 5.0;
    double trans_tolerance_mr = 5.0;
};

struct RecognitionBatchResult {
    std::vector<SceneEvaluation> scenes;
    long total_expected = 0;
    long total_recognized = 0;
    long total_false_positives = 0;
    double recognition_rate = 0.0;
    double mean_rotation_error_deg = 0.0;
    double max_rotation_error_deg = 0.0;
    double mean_translation_error_mr = 0.0;
    double max_translation_error_mr = 0.0;
};

/// End-to-end synthetic recognition batch. `scene_pool` lists the meshes
/// scenes are composed from; `pool_to_library[i]` maps pool entry i to its
/// library model id, or -1 when the mesh is a non-library distractor.
RecognitionBatchResult recognition_batch(const ModelLibrary& library,
                                         const std::vector<TriangleMesh>& scene_pool,
                                         const std::vector<int>& pool_to_library,
                                         const RecognitionParams& params,
                                         const RecognitionBatchOptions& options);

} // namespace rops
