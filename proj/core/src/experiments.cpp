#include "rops/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "rops/error.hpp"
#include "rops/kdtree.hpp"
#include "rops/parallel.hpp"

namespace rops {

std::vector<NamedMesh> experiment_model_suite() {
    std::vector<NamedMesh> suite;

    const auto trefoil_path = make_torus_knot_path(2, 3, 1440, 0.55);
    suite.push_back({"trefoil", displace_radial(make_tube(trefoil_path, 360, 42, 0.55), 51,
                                                {.lobes = 8,
                                                 .max_lobe_amplitude = 0.12,
                                                 .waves = 3,
                                                 .wave_amplitude = 0.04,
                                                 .min_wave_frequency = 4.0,
                                                 .max_wave_frequency = 8.0})});

    const auto cinq_path = make_torus_knot_path(2, 5, 1680, 0.52);
    suite.push_back({"cinquefoil", displace_radial(make_tube(cinq_path, 420, 36, 0.42), 52,
                                                   {.lobes = 8,
                                                    .max_lobe_amplitude = 0.12,
                                                    .waves = 3,
                                                    .wave_amplitude = 0.04,
                                                    .min_wave_frequency = 4.0,
                                                    .max_wave_frequency = 8.0})});

    suite.push_back({"torus", displace_radial(make_torus(160, 60, 1.0, 0.35), 41,
                                              {.lobes = 8,
                                               .max_lobe_amplitude = 0.15,
                                               .waves = 3,
                                               .wave_amplitude = 0.05,
                                               .min_wave_frequency = 5.0,
                                               .max_wave_frequency = 9.0})});

    suite.push_back({"blob", make_blob(43)});
    return suite;
}

TriangleMesh experiment_distractor() {
    // A (3, 2) knot with its own detail field: tube-like such as the suite
    // models, but not any of them.
    const auto path = make_torus_knot_path(3, 2, 1440, 0.5);
    return displace_radial(make_tube(path, 360, 40, 0.5), 77,
                           {.lobes = 8,
                            .max_lobe_amplitude = 0.12,
                            .waves = 3,
                            .wave_amplitude = 0.04,
                            .min_wave_frequency = 4.0,
                            .max_wave_frequency = 8.0});
}

void LrfErrorResult::merge(const LrfErrorResult& other) {
    for (size_t i = 0; i < histogram.size(); ++i) histogram[i] += other.histogram[i];
    used_pairs += other.used_pairs;
    skipped_pairs += other.skipped_pairs;
    failed_pairs += other.failed_pairs;
    fraction_below_10deg = used_pairs > 0 ? double(histogram[0]) / double(used_pairs) : 0.0;
}

LrfErrorResult lrf_error_experiment(const TriangleMesh& model, const LrfErrorOptions& options) {
    validate_mesh(model);
    const double model_mr = mesh_resolution(model);

    TriangleMesh scene = decimate(model, options.decimation);
    if (options.noise_sigma_mr > 0.0) {
        // Noise magnitude is pinned to the original model resolution.
        const double sigma_scene_units =
            options.noise_sigma_mr * model_mr / mesh_resolution(scene);
        scene = add_gaussian_noise(scene, sigma_scene_units, options.seed);
    }

    const double support = options.support_radius_mr * model_mr;
    const double cutoff = options.max_correspondence_mr * model_mr;
    const KdTree scene_tree = KdTree::from_points(scene.vertices);
    const SurfaceCropper model_cropper(model);
    const SurfaceCropper scene_cropper(scene);

    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> pick(0, int(model.vertices.size()) - 1);
    std::vector<int> sample(size_t(options.pairs));
    for (int& s : sample) s = pick(rng);

    enum class Outcome : uint8_t { Used, Skipped, Failed };
    std::vector<Outcome> outcome(sample.size(), Outcome::Failed);
    std::vector<double> error_deg(sample.size(), 0.0);

    parallel_for(sample.size(), [&](size_t i) {
        const Vec3& p_model = model.vertices[size_t(sample[i])];
        const auto nn = scene_tree.nearest(p_model, cutoff);
        if (nn.index < 0) {
            outcome[i] = Outcome::Skipped;
            return;
        }
        const Vec3& p_scene = scene.vertices[size_t(nn.index)];
        try {
            const LocalReferenceFrame lrf_model =
                compute_lrf(model_cropper.crop(p_model, support));
            const LocalReferenceFrame lrf_scene =
                compute_lrf(scene_cropper.crop(p_scene, support));
            error_deg[i] = lrf_error_degrees(lrf_scene, lrf_model);
            outcome[i] = Outcome::Used;
        } catch (const Error&) {
            outcome[i] = Outcome::Failed;
        }
    });

    LrfErrorResult result;
    for (size_t i = 0; i < sample.size(); ++i) {
        switch (outcome[i]) {
            case Outcome::Skipped: ++result.skipped_pairs; break;
            case Outcome::Failed: ++result.failed_pairs; break;
            case Outcome::Used: {
                int bin = int(error_deg[i] / 10.0);
                bin = std::clamp(bin, 0, int(result.histogram.size()) - 1);
                ++result.histogram[size_t(bin)];
                ++result.used_pairs;
                break;
            }
        }
    }
    result.fraction_below_10deg =
        result.used_pairs > 0 ? double(result.histogram[0]) / double(result.used_pairs) : 0.0;
    return result;
}

void save_lrf_histogram_csv(const LrfErrorResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "bin_lo_deg,bin_hi_deg,count,fraction\n";
    for (size_t b = 0; b < result.histogram.size(); ++b) {
        const double frac =
            result.used_pairs > 0 ? double(result.histogram[b]) / double(result.used_pairs) : 0.0;
        out << b * 10 << ',' << (b + 1) * 10 << ',' << result.histogram[b] << ',' << frac << "\n";
    }
    if (!out) throw ParseError("write failed for '" + path + "'");
}

std::vector<double> default_ratio_thresholds() {
    std::vector<double> out;
    for (int i = 1; i <= 20; ++i) out.push_back(double(i) * 0.05);
    return out;
}

RpExperimentResult rp_experiment(const std::vector<TriangleMesh>& models,
                                 const RpExperimentOptions& options) {
    if (models.empty()) throw ConfigError("rp experiment needs models");

    double ref_mr = 0.0;
    for (const TriangleMesh& m : models) ref_mr += mesh_resolution(m);
    ref_mr /= double(models.size());

    ComposedScene composed = compose_scene(models, options.scene_models, options.seed);
    TriangleMesh scene = std::move(composed.scene);
    if (options.decimation < 1.0) scene = decimate(scene, options.decimation);
    if (options.noise_sigma_mr > 0.0) {
        const double sigma_scene_units =
            options.noise_sigma_mr * ref_mr / mesh_resolution(scene);
        scene = add_gaussian_noise(scene, sigma_scene_units, options.seed + 1);
    }
    return rp_experiment_on_scene(models, scene, composed.poses, options);
}

RpExperimentResult rp_experiment_on_scene(const std::vector<TriangleMesh>& models,
                                          const TriangleMesh& scene,
                                          const std::vector<GroundTruthPose>& poses,
                                          const RpExperimentOptions& options) {
    options.rops.validate();
    if (models.empty()) throw ConfigError("rp experiment needs models");

    const std::vector<double> thresholds =
        options.thresholds.empty() ? default_ratio_thresholds() : options.thresholds;

    const KdTree scene_tree = KdTree::from_points(scene.vertices);
    const SurfaceCropper scene_cropper(scene);

    RpExperimentResult result;
    std::vector<RPCurvePoint> merged;
    std::mt19937_64 rng(options.seed ^ 0x2545f4914f6cdd1dull);

    for (const GroundTruthPose& pose : poses) {
        const TriangleMesh& model = models[size_t(pose.model_id)];
        const double model_mr = mesh_resolution(model);
        const double support = options.rops.support_radius_mr * model_mr;
        const double cutoff = options.max_correspondence_mr * model_mr;
        const SurfaceCropper model_cropper(model);

        std::uniform_int_distribution<int> pick(0, int(model.vertices.size()) - 1);
        std::vector<int> sample(size_t(options.feature_points_per_model));
        for (int& s : sample) s = pick(rng);
        std::sort(sample.begin(), sample.end());
        sample.erase(std::unique(sample.begin(), sample.end()), sample.end());

        struct Pair {
            LocatedFeature model_side;
            LocatedFeature scene_side;
            bool ok = false;
        };
        std::vector<Pair> pairs(sample.size());
        parallel_for(sample.size(), [&](size_t i) {
            const Vec3& p_model = model.vertices[size_t(sample[i])];
            const Vec3 mapped = transform_point(p_model, pose.rotation, pose.translation);
            const auto nn = scene_tree.nearest(mapped, cutoff);
            if (nn.index < 0) return;
            const Vec3& p_scene = scene.vertices[size_t(nn.index)];
            try {
                const LocalSurface ms = model_cropper.crop(p_model, support);
                const LocalReferenceFrame ml = compute_lrf(ms);
                const LocalSurface ss = scene_cropper.crop(p_scene, support);
                const LocalReferenceFrame sl = compute_lrf(ss);
                pairs[i].model_side = {p_model, compute_rops(ms, ml, options.rops).values};
                pairs[i].scene_side = {p_scene, compute_rops(ss, sl, options.rops).values};
                pairs[i].ok = true;
            } catch (const Error&) {
            }
        });

        std::vector<LocatedFeature> model_features, scene_features;
        for (Pair& p : pairs) {
            if (!p.ok) continue;
            model_features.push_back(std::move(p.model_side));
            scene_features.push_back(std::move(p.scene_side));
        }
        if (model_features.size() < 2) continue;
        result.descriptor_pairs += long(model_features.size());

        const double tolerance = options.location_tolerance_mr * model_mr;
        const auto points = rp_curve(scene_features, model_features, pose, tolerance, thresholds);
        if (merged.empty()) {
            merged = points;
        } else {
            for (size_t i = 0; i < merged.size(); ++i) {
                merged[i].true_positives += points[i].true_positives;
                merged[i].false_positives += points[i].false_positives;
                merged[i].total_positives += points[i].total_positives;
                merged[i].total_matches += points[i].total_matches;
            }
        }
    }

    for (RPCurvePoint& p : merged) {
        p.recall =
            p.total_positives > 0 ? double(p.true_positives) / double(p.total_positives) : 0.0;
        p.one_minus_precision =
            p.total_matches > 0 ? double(p.false_positives) / double(p.total_matches) : 0.0;
    }
    result.points = std::move(merged);
    return result;
}

PoseErrors pose_errors(const RecognizedInstance& instance, const GroundTruthPose& gt,
                       double model_resolution) {
    PoseErrors err;
    err.rotation_deg =
        rotation_angle_between(instance.rotation, gt.rotation) * 180.0 / std::numbers::pi;
    err.translation_mr = norm(instance.translation - gt.translation) / model_resolution;
    return err;
}

SceneEvaluation evaluate_recognition(const RecognitionResult& result,
                                     const std::vector<GroundTruthPose>& gt,
                                     const ModelLibrary& library, double rot_tolerance_deg,
                                     double trans_tolerance_mr) {
    SceneEvaluation eval;
    std::vector<uint8_t> instance_used(result.instances.size(), 0);

    for (const GroundTruthPose& pose : gt) {
        if (pose.model_id < 0) continue; // clutter object, not expected
        ++eval.expected;
        const double mr = library.models.at(size_t(pose.model_id)).resolution;
        int best = -1;
        PoseErrors best_err;
        for (size_t i = 0; i < result.instances.size(); ++i) {
            if (instance_used[i]) continue;
            const RecognizedInstance& inst = result.instances[i];
            if (inst.model_id != pose.model_id) continue;
            const PoseErrors err = pose_errors(inst, pose, mr);
            if (err.rotation_deg >= rot_tolerance_deg || err.translation_mr >= trans_tolerance_mr)
                continue;
            if (best < 0 || err.rotation_deg < best_err.rotation_deg) {
                best = int(i);
                best_err = err;
            }
        }
        if (best >= 0) {
            instance_used[size_t(best)] = 1;
            ++eval.recognized;
            eval.matched_errors.push_back(best_err);
        }
    }
    for (uint8_t used : instance_used)
        if (!used) ++eval.false_positives;
    return eval;
}

RecognitionBatchResult recognition_batch(const ModelLibrary& library,
                                         const std::vector<TriangleMesh>& scene_pool,
                                         const std::vector<int>& pool_to_library,
                                         const RecognitionParams& params,
                                         const RecognitionBatchOptions& options) {
    if (scene_pool.size() != pool_to_library.size())
        throw ConfigError("recognition_batch: pool map size mismatch");
    const double ref_mr = library.reference_resolution();

    RecognitionBatchResult batch;
    for (int s = 0; s < options.scenes; ++s) {
        const uint64_t scene_seed = options.seed + uint64_t(s) * 7919;
        ComposedScene composed =
            compose_scene(scene_pool, options.instances_per_scene, scene_seed);
        TriangleMesh scene = std::move(composed.scene);
        if (options.decimation < 1.0) scene = decimate(scene, options.decimation);
        if (options.noise_sigma_mr > 0.0) {
            const double sigma_scene_units =
                options.noise_sigma_mr * ref_mr / mesh_resolution(scene);
            scene = add_gaussian_noise(scene, sigma_scene_units, scene_seed + 1);
        }

        std::vector<GroundTruthPose> gt = composed.poses;
        for (GroundTruthPose& pose : gt) pose.model_id = pool_to_library.at(size_t(pose.model_id));

        const RecognitionResult result = recognize(scene, library, params);
        const SceneEvaluation eval = evaluate_recognition(
            result, gt, library, options.rot_tolerance_deg, options.trans_tolerance_mr);
        batch.scenes.push_back(eval);
        batch.total_expected += eval.expected;
        batch.total_recognized += eval.recognized;
        batch.total_false_positives += eval.false_positives;
        for (const PoseErrors& err : eval.matched_errors) {
            batch.mean_rotation_error_deg += err.rotation_deg;
            batch.max_rotation_error_deg = std::max(batch.max_rotation_error_deg, err.rotation_deg);
            batch.mean_translation_error_mr += err.translation_mr;
            batch.max_translation_error_mr =
                std::max(batch.max_translation_error_mr, err.translation_mr);
        }
    }
    if (batch.total_recognized > 0) {
        batch.mean_rotation_error_deg /= double(batch.total_recognized);
        batch.mean_translation_error_mr /= double(batch.total_recognized);
    }
    batch.recognition_rate = batch.total_expected > 0
                                 ? double(batch.total_recognized) / double(batch.total_expected)
                                 : 0.0;
    return batch;
}

} // namespace rops
