#pragma once

#include <string>
#include <vector>

#include "rops/matching.hpp"
#include "rops/rops.hpp"

namespace rops {

struct ModelFeatureRecord {
    Vec3 position;
    LocalReferenceFrame lrf;
    std::vector<double> descriptor;
};

struct NamedMesh {
    std::string name;
    TriangleMesh mesh;
};

struct LibraryModel {
    std::string name;
    TriangleMesh mesh;          // empty until attached when loaded from file
    double resolution = 0.0;    // mesh resolution (mr), 0 when mesh absent
    std::vector<ModelFeatureRecord> features;
    int degenerate_skipped = 0; // seeds dropped for unusable LRFs
};

struct ModelLibrary {
    RopsParams params;
    std::vector<LibraryModel> models;
    DescriptorIndex index; // labels are (model index, feature index)

    void rebuild_index();
    /// Mean resolution over models with meshes attached; the scale used for
    /// scene-side support radii. Throws ConfigError when no mesh is present.
    double reference_resolution() const;
    bool meshes_attached() const;
};

struct LibraryBuildOptions {
    double resolution_control_rho_mr = 2.0;
};

/// Offline model representation: evenly sample seed_count seeds (farthest
/// point sampling), thin them with a resolution-control radius, then store
/// position, LRF and descriptor per surviving feature, all indexed.
ModelLibrary build_model_library(const std::vector<NamedMesh>& models, int seed_count,
                                 const RopsParams& params, const LibraryBuildOptions& options = {});

/// Re-attach model meshes (by name) to a library loaded from disk.
void attach_meshes(ModelLibrary& library, const std::vector<NamedMesh>& meshes);

struct SceneFeature {
    int vertex_id = -1;
    Vec3 position;
    LocalReferenceFrame lrf;
};

struct DetectOptions {
    double decimation_fraction = 0.125; // seed-selection decimation
    double resolution_control_rho_mr = 2.0; // in scene mr
    double tau_lambda = 1.2;            // keep features with l1/l2 > tau
    double support_radius = 0.0;        // world units; must be set
};

/// Scene feature detection cascade: seeds from a decimated copy, resolution
/// control, boundary rejection, then LRF computation with the eigenvalue
/// ratio filter. May return an empty list.
std::vector<SceneFeature> detect_scene_features(const TriangleMesh& scene,
                                                const DetectOptions& options);

struct TransformHypothesis {
    int model_id = -1;
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
    int scene_feature_id = -1;
    int model_feature_id = -1;
    double feature_distance = 0.0;
};

/// Single-correspondence pose: aligns the model frame onto the scene frame.
/// Row convention: R = Fm^T * Fs, t = p_s - p_m * R.
TransformHypothesis hypothesize(const Vec3& scene_position, const LocalReferenceFrame& scene_lrf,
                                const Vec3& model_position, const LocalReferenceFrame& model_lrf);

struct HypothesisCluster {
    std::vector<int> member_ids; // indices into the hypothesis list
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
    Vec3 euler_center;
    int support = 0;        // n_f
    double mean_distance = 0.0; // d
    double score = 0.0;     // s_c = n_f / d
};

/// One cluster is seeded per hypothesis (members within both the Euler
/// tau_a and translation tau_t bounds of the seed); centers are member
/// means. Clusters scoring below half the maximum are pruned, then the
/// survivors are picked greedily best-first, dropping any cluster within
/// both bounds of an already selected one.
std::vector<HypothesisCluster> cluster_hypotheses(
    const std::vector<TransformHypothesis>& hypotheses, double tau_a_radians,
    double tau_t_world);

struct IcpOptions {
    double rejection_radius_mr = 4.0;
    int max_iterations = 50;
    double convergence_tol_mr = 1e-4;
};

struct IcpResult {
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
    /// Mean distance over the final correspondences, in model mr units;
    /// +infinity when no correspondence fell inside the rejection radius.
    double epsilon_mr = 0.0;
    int correspondences = 0;
    int iterations = 0;
};

/// Point-to-point ICP from an initial pose: closest scene vertex per
/// transformed model vertex within the rejection radius, least-squares
/// rigid update, repeated until the mean residual settles.
IcpResult icp_refine(const TriangleMesh& scene, const TriangleMesh& model,
                     const Mat3& initial_rotation, const Vec3& initial_translation,
                     const IcpOptions& options = {});

struct RecognizedInstance {
    int model_id = -1;
    std::string model_name;
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
    double epsilon_mr = 0.0;
    double alpha = 0.0; // visible proportion n_c / n_s
};

struct RecognitionResult {
    std::vector<RecognizedInstance> instances;
    /// Per scene vertex: the accepted model id, or -1 for background.
    std::vector<int> segmentation;
    int unlabeled_points = 0;
};

struct VerifyOptions {
    double epsilon1_mr = 0.75;
    double epsilon2_mr = 1.5;
    double alpha1 = 0.04;
    double alpha2 = 0.2;
    double correspondence_radius_mr = 2.0; // "twice the model resolution"
    int min_scene_points = 100;
    IcpOptions icp;
};

struct CandidateHypotheses {
    int model_id = -1;
    std::vector<HypothesisCluster> clusters; // ranked
};

/// Tries candidates in rank order, clusters best-first. A hypothesis is
/// accepted iff (eps < eps1 and alpha > alpha1) or (eps < eps2 and
/// alpha > alpha2); acceptance labels the explained scene points and
/// removes them before the next attempt.
RecognitionResult verify_and_segment(const TriangleMesh& scene, const ModelLibrary& library,
                                     const std::vector<CandidateHypotheses>& candidates,
                                     const VerifyOptions& options = {});

struct RecognitionParams {
    double tau_f = 0.8;
    double tau_lambda = 1.2;
    double tau_a_radians = 0.2;
    double tau_t_mr = 30.0;
    double scene_decimation = 0.125;
    double resolution_control_rho_mr = 2.0;
    VerifyOptions verify;
};

/// The full online pipeline: detect scene features, describe, match with
/// the ratio test, vote for candidate models, generate and cluster
/// single-correspondence hypotheses, then verify and segment.
RecognitionResult recognize(const TriangleMesh& scene, const ModelLibrary& library,
                            const RecognitionParams& params = {});

struct OcclusionResult {
    double occlusion = 0.0;        // 1 - visible area fraction
    double visible_fraction = 0.0; // model surface patch area in scene / total
};

/// Fraction of the model surface absent from the scene under a known pose:
/// a model triangle counts as visible when all three of its vertices have a
/// scene correspondent within twice the model resolution.
OcclusionResult occlusion(const TriangleMesh& model, const TriangleMesh& scene,
                          const GroundTruthPose& pose);

} // namespace rops
