#include "rops/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rops/error.hpp"
#include "rops/parallel.hpp"
#include "rops/synthetic.hpp"

namespace rops {

namespace {

/// Farthest-point sampling over mesh vertices, seeded at vertex 0.
std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int count) {
    std::vector<int> chosen;
    chosen.reserve(size_t(count));
    std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
    int current = 0;
    chosen.push_back(current);
    while (int(chosen.size()) < count) {
        int next = -1;
        double best = -1.0;
        for (size_t i = 0; i < points.size(); ++i) {
            const double d = squared_norm(points[i] - points[current]);
            if (d < dist[i]) dist[i] = d;
            if (dist[i] > best) {
                best = dist[i];
                next = int(i);
            }
        }
        if (next < 0 || best <= 0.0) break;
        chosen.push_back(next);
        current = next;
    }
    return chosen;
}

/// Greedy thinning: keep a seed unless an already kept one is within rho.
std::vector<int> resolution_control(const std::vector<Vec3>& points,
                                    const std::vector<int>& seeds, double rho) {
    if (rho <= 0.0) return seeds;
    const double sq_rho = rho * rho;
    std::vector<int> kept;
    std::vector<Vec3> kept_pos;
    for (int s : seeds) {
        bool suppressed = false;
        for (const Vec3& q : kept_pos) {
            if (squared_norm(points[s] - q) < sq_rho) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept.push_back(s);
            kept_pos.push_back(points[s]);
        }
    }
    return kept;
}

} // namespace

void ModelLibrary::rebuild_index() {
    std::vector<LabeledDescriptor> entries;
    for (size_t m = 0; m < models.size(); ++m)
        for (size_t f = 0; f < models[m].features.size(); ++f)
            entries.push_back({models[m].features[f].descriptor, int(m), int(f)});
    // A 1-feature library is storable and loadable; it just cannot answer
    // ratio-test queries until more features exist.
    index = entries.size() >= 2 ? DescriptorIndex(std::move(entries)) : DescriptorIndex();
}

double ModelLibrary::reference_resolution() const {
    double sum = 0.0;
    int n = 0;
    for (const LibraryModel& m : models) {
        if (m.resolution > 0.0) {
            sum += m.resolution;
            ++n;
        }
    }
    if (n == 0) throw ConfigError("library has no attached meshes");
    return sum / double(n);
}

bool ModelLibrary::meshes_attached() const {
    for (const LibraryModel& m : models)
        if (m.mesh.empty()) return false;
    return !models.empty();
}

ModelLibrary build_model_library(const std::vector<NamedMesh>& models, int seed_count,
                                 const RopsParams& params, const LibraryBuildOptions& options) {
    params.validate();
    if (models.empty()) throw ConfigError("model library needs at least one model");
    if (seed_count < 1) throw ConfigError("seed count must be >= 1");

    ModelLibrary library;
    library.params = params;
    library.models.resize(models.size());

    // One physical support radius across the whole library (and later the
    // scene): descriptors are only comparable at a common scale.
    double reference = 0.0;
    for (size_t m = 0; m < models.size(); ++m) {
        validate_mesh(models[m].mesh);
        library.models[m].resolution = mesh_resolution(models[m].mesh);
        reference += library.models[m].resolution;
    }
    reference /= double(models.size());
    const double support = params.support_radius_mr * reference;

    for (size_t m = 0; m < models.size(); ++m) {
        const TriangleMesh& mesh = models[m].mesh;
        if (int(mesh.vertices.size()) <= seed_count)
            throw MeshError("model '" + models[m].name + "' has too few vertices for " +
                            std::to_string(seed_count) + " seeds");

        LibraryModel& entry = library.models[m];
        entry.name = models[m].name;
        entry.mesh = mesh;

        const double rho = options.resolution_control_rho_mr * entry.resolution;
        const auto seeds = farthest_point_sample(mesh.vertices, seed_count);
        const auto kept = resolution_control(mesh.vertices, seeds, rho);

        const SurfaceCropper cropper(mesh);
        std::vector<ModelFeatureRecord> records(kept.size());
        std::vector<uint8_t> ok(kept.size(), 0);
        parallel_for(kept.size(), [&](size_t i) {
            try {
                const Vec3& p = mesh.vertices[size_t(kept[i])];
                const LocalSurface surface = cropper.crop(p, support);
                ModelFeatureRecord rec;
                rec.position = p;
                rec.lrf = compute_lrf(surface);
                rec.descriptor = compute_rops(surface, rec.lrf, params).values;
                records[i] = std::move(rec);
                ok[i] = 1;
            } catch (const Error&) {
                ok[i] = 0; // degenerate feature; counted below
            }
        });
        for (size_t i = 0; i < kept.size(); ++i) {
            if (ok[i])
                entry.features.push_back(std::move(records[i]));
            else
                ++entry.degenerate_skipped;
        }
    }
    library.rebuild_index();
    return library;
}

void attach_meshes(ModelLibrary& library, const std::vector<NamedMesh>& meshes) {
    for (LibraryModel& entry : library.models) {
        const NamedMesh* found = nullptr;
        for (const NamedMesh& nm : meshes)
            if (nm.name == entry.name) found = &nm;
        if (!found) throw ConfigError("no mesh supplied for library model '" + entry.name + "'");
        validate_mesh(found->mesh);
        entry.mesh = found->mesh;
        entry.resolution = mesh_resolution(found->mesh);
    }
}

std::vector<SceneFeature> detect_scene_features(const TriangleMesh& scene,
                                                const DetectOptions& options) {
    validate_mesh(scene);
    if (!(options.support_radius > 0.0))
        throw ConfigError("detect_scene_features: support radius must be set");

    const double scene_mr = mesh_resolution(scene);

    // Seeds: scene vertices nearest to the vertices of a decimated copy.
    const TriangleMesh low = decimate(scene, options.decimation_fraction);
    const KdTree scene_tree = KdTree::from_points(scene.vertices);
    std::vector<int> seeds;
    seeds.reserve(low.vertices.size());
    for (const Vec3& v : low.vertices) {
        const auto nn = scene_tree.nearest(v);
        if (nn.index >= 0) seeds.push_back(nn.index);
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    seeds = resolution_control(scene.vertices, seeds,
                               options.resolution_control_rho_mr * scene_mr);

    // Boundary rejection: drop seeds whose support sphere reaches a
    // boundary edge of the range mesh.
    const auto mask = boundary_vertex_mask(scene);
    std::vector<Vec3> boundary_points;
    for (size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) boundary_points.push_back(scene.vertices[v]);
    if (!boundary_points.empty()) {
        const KdTree boundary_tree = KdTree::from_points(boundary_points);
        std::vector<int> interior;
        interior.reserve(seeds.size());
        for (int s : seeds) {
            const auto nn = boundary_tree.nearest(scene.vertices[size_t(s)],
                                                  options.support_radius);
            if (nn.index < 0) interior.push_back(s);
        }
        seeds.swap(interior);
    }

    const SurfaceCropper cropper(scene);
    std::vector<SceneFeature> features(seeds.size());
    std::vector<uint8_t> ok(seeds.size(), 0);
    parallel_for(seeds.size(), [&](size_t i) {
        try {
            const Vec3& p = scene.vertices[size_t(seeds[i])];
            const LocalSurface surface = cropper.crop(p, options.support_radius);
            const LocalReferenceFrame lrf = compute_lrf(surface);
            if (!(lrf.axis_ratio() > options.tau_lambda)) return;
            features[i] = {seeds[i], p, lrf};
            ok[i] = 1;
        } catch (const Error&) {
            // unusable seed
        }
    });

    std::vector<SceneFeature> out;
    out.reserve(features.size());
    for (size_t i = 0; i < features.size(); ++i)
        if (ok[i]) out.push_back(features[i]);
    return out;
}

TransformHypothesis hypothesize(const Vec3& scene_position, const LocalReferenceFrame& scene_lrf,
                                const Vec3& model_position, const LocalReferenceFrame& model_lrf) {
    TransformHypothesis h;
    h.rotation = model_lrf.axes.transposed() * scene_lrf.axes;
    h.translation = scene_position - model_position * h.rotation;
    return h;
}

std::vector<HypothesisCluster> cluster_hypotheses(
    const std::vector<TransformHypothesis>& hypotheses, double tau_a_radians,
    double tau_t_world) {
    if (hypotheses.empty()) return {};

    const size_t n = hypotheses.size();
    std::vector<Vec3> eulers(n);
    for (size_t i = 0; i < n; ++i) eulers[i] = euler_zyx_from_rotation(hypotheses[i].rotation);

    std::vector<HypothesisCluster> clusters(n);
    for (size_t i = 0; i < n; ++i) {
        HypothesisCluster& c = clusters[i];
        Vec3 euler_sum{}, t_sum{};
        double dist_sum = 0.0;
        for (size_t j = 0; j < n; ++j) {
            if (norm(eulers[j] - eulers[i]) >= tau_a_radians) continue;
            if (norm(hypotheses[j].translation - hypotheses[i].translation) >= tau_t_world)
                continue;
            c.member_ids.push_back(int(j));
            euler_sum += eulers[j];
            t_sum += hypotheses[j].translation;
            dist_sum += hypotheses[j].feature_distance;
        }
        const double count = double(c.member_ids.size());
        c.euler_center = euler_sum / count;
        c.rotation = rotation_from_euler_zyx(c.euler_center);
        c.translation = t_sum / count;
        c.support = int(c.member_ids.size());
        c.mean_distance = std::max(dist_sum / count, 1e-12);
        c.score = double(c.support) / c.mean_distance;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return clusters[a].score > clusters[b].score; });

    const double score_floor = clusters[size_t(order[0])].score / 2.0;
    std::vector<HypothesisCluster> selected;
    for (int idx : order) {
        const HypothesisCluster& c = clusters[size_t(idx)];
        if (c.score < score_floor) break; // sorted: everything after is below
        bool near_selected = false;
        for (const HypothesisCluster& s : selected) {
            if (norm(c.euler_center - s.euler_center) < tau_a_radians &&
                norm(c.translation - s.translation) < tau_t_world) {
                near_selected = true;
                break;
            }
        }
        if (!near_selected) selected.push_back(c);
    }
    return selected;
}

namespace {

IcpResult icp_refine_points(const std::vector<Vec3>& model_points, const KdTree& scene_tree,
                            const std::vector<Vec3>& scene_points, double model_resolution,
                            const Mat3& r0, const Vec3& t0, const IcpOptions& options) {
    IcpResult result;
    result.rotation = r0;
    result.translation = t0;
    result.epsilon_mr = std::numeric_limits<double>::infinity();

    const double rejection = options.rejection_radius_mr * model_resolution;
    const double tol = options.convergence_tol_mr * model_resolution;

    Mat3 r = r0;
    Vec3 t = t0;
    double prev_residual = std::numeric_limits<double>::infinity();

    std::vector<Vec3> from, to;
    from.reserve(model_points.size());
    to.reserve(model_points.size());

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        from.clear();
        to.clear();
        for (const Vec3& m : model_points) {
            const Vec3 q = transform_point(m, r, t);
            const auto nn = scene_tree.nearest(q, rejection);
            if (nn.index < 0) continue;
            from.push_back(m);
            to.push_back(scene_points[size_t(nn.index)]);
        }
        if (from.size() < 3) {
            // Too little overlap to refine: report the sentinel.
            result.rotation = r0;
            result.translation = t0;
            result.epsilon_mr = std::numeric_limits<double>::infinity();
            result.correspondences = int(from.size());
            return result;
        }

        const RigidTransform fit = fit_rigid(from, to);
        r = fit.rotation;
        t = fit.translation;

        double residual = 0.0;
        for (size_t i = 0; i < from.size(); ++i)
            residual += norm(transform_point(from[i], r, t) - to[i]);
        residual /= double(from.size());

        result.rotation = r;
        result.translation = t;
        result.epsilon_mr = residual / model_resolution;
        result.correspondences = int(from.size());
        result.iterations = iter + 1;

        if (std::abs(prev_residual - residual) < tol) break;
        prev_residual = residual;
    }
    return result;
}

} // namespace

IcpResult icp_refine(const TriangleMesh& scene, const TriangleMesh& model,
                     const Mat3& initial_rotation, const Vec3& initial_translation,
                     const IcpOptions& options) {
    const double mr = mesh_resolution(model);
    const KdTree scene_tree = KdTree::from_points(scene.vertices);
    return icp_refine_points(model.vertices, scene_tree, scene.vertices, mr, initial_rotation,
                             initial_translation, options);
}

RecognitionResult verify_and_segment(const TriangleMesh& scene, const ModelLibrary& library,
                                     const std::vector<CandidateHypotheses>& candidates,
                                     const VerifyOptions& options) {
    RecognitionResult result;
    result.segmentation.assign(scene.vertices.size(), -1);

    std::vector<int> alive(scene.vertices.size());
    std::iota(alive.begin(), alive.end(), 0);

    std::vector<Vec3> alive_points;
    KdTree alive_tree;
    bool tree_dirty = true;
    auto refresh = [&] {
        if (!tree_dirty) return;
        alive_points.clear();
        alive_points.reserve(alive.size());
        for (int v : alive) alive_points.push_back(scene.vertices[size_t(v)]);
        alive_tree = KdTree::from_points(alive_points);
        tree_dirty = false;
    };

    for (const CandidateHypotheses& candidate : candidates) {
        if (long(alive.size()) < options.min_scene_points) break;
        const LibraryModel& model = library.models.at(size_t(candidate.model_id));
        if (model.mesh.empty())
            throw ConfigError("model '" + model.name + "' has no mesh attached for verification");
        const double mr = model.resolution;
        const double corr_radius = options.correspondence_radius_mr * mr;

        for (const HypothesisCluster& cluster : candidate.clusters) {
            if (long(alive.size()) < options.min_scene_points) break;
            refresh();

            const IcpResult icp =
                icp_refine_points(model.mesh.vertices, alive_tree, alive_points, mr,
                                  cluster.rotation, cluster.translation, options.icp);
            if (!std::isfinite(icp.epsilon_mr)) continue;

            // Visible proportion: alive scene points explained by the
            // transformed model within twice the model resolution.
            std::vector<Vec3> transformed(model.mesh.vertices.size());
            for (size_t i = 0; i < transformed.size(); ++i)
                transformed[i] =
                    transform_point(model.mesh.vertices[i], icp.rotation, icp.translation);
            const KdTree model_tree = KdTree::from_points(transformed);

            std::vector<uint8_t> explained(alive.size(), 0);
            parallel_for(alive.size(), [&](size_t i) {
                const auto nn = model_tree.nearest(alive_points[i], corr_radius);
                if (nn.index >= 0) explained[i] = 1;
            });
            long n_c = 0;
            for (uint8_t e : explained) n_c += e;
            const double alpha = double(n_c) / double(alive.size());

            const bool accept = (icp.epsilon_mr < options.epsilon1_mr && alpha > options.alpha1) ||
                                (icp.epsilon_mr < options.epsilon2_mr && alpha > options.alpha2);
            if (!accept) continue;

            RecognizedInstance instance;
            instance.model_id = candidate.model_id;
            instance.model_name = model.name;
            instance.rotation = icp.rotation;
            instance.translation = icp.translation;
            instance.epsilon_mr = icp.epsilon_mr;
            instance.alpha = alpha;
            result.instances.push_back(instance);

            std::vector<int> remaining;
            remaining.reserve(alive.size());
            for (size_t i = 0; i < alive.size(); ++i) {
                if (explained[i])
                    result.segmentation[size_t(alive[i])] = candidate.model_id;
                else
                    remaining.push_back(alive[i]);
            }
            alive.swap(remaining);
            tree_dirty = true;
        }
    }

    result.unlabeled_points = int(alive.size());
    return result;
}

RecognitionResult recognize(const TriangleMesh& scene, const ModelLibrary& library,
                            const RecognitionParams& params) {
    if (!library.meshes_attached())
        throw ConfigError("recognize: library needs model meshes attached");
    library.params.validate();
    if (library.index.size() < 2)
        throw ConfigError("recognize: library index needs at least 2 features");

    const double support = library.params.support_radius_mr * library.reference_resolution();

    DetectOptions detect;
    detect.decimation_fraction = params.scene_decimation;
    detect.resolution_control_rho_mr = params.resolution_control_rho_mr;
    detect.tau_lambda = params.tau_lambda;
    detect.support_radius = support;
    const std::vector<SceneFeature> features = detect_scene_features(scene, detect);

    RecognitionResult empty;
    empty.segmentation.assign(scene.vertices.size(), -1);
    empty.unlabeled_points = int(scene.vertices.size());
    if (features.empty()) return empty;

    // Describe every scene feature.
    const SurfaceCropper cropper(scene);
    std::vector<std::vector<double>> descriptors(features.size());
    std::vector<uint8_t> described(features.size(), 0);
    parallel_for(features.size(), [&](size_t i) {
        try {
            const LocalSurface surface = cropper.crop(features[i].position, support);
            descriptors[i] = compute_rops(surface, features[i].lrf, library.params).values;
            described[i] = 1;
        } catch (const Error&) {
        }
    });

    // Ratio-test matching against the whole library.
    std::vector<std::optional<FeatureCorrespondence>> matches(features.size());
    parallel_for(features.size(), [&](size_t i) {
        if (!described[i]) return;
        matches[i] = match_features(library.index, descriptors[i], params.tau_f, int(i));
    });

    // Votes per model; candidates ranked by votes, ties toward lower id.
    std::vector<long> votes(library.models.size(), 0);
    std::vector<FeatureCorrespondence> correspondences;
    for (const auto& m : matches) {
        if (!m) continue;
        correspondences.push_back(*m);
        ++votes[size_t(m->model_id)];
    }
    if (correspondences.empty()) return empty;

    std::vector<int> candidate_ids;
    for (size_t m = 0; m < votes.size(); ++m)
        if (votes[m] > 0) candidate_ids.push_back(int(m));
    std::stable_sort(candidate_ids.begin(), candidate_ids.end(),
                     [&](int a, int b) { return votes[size_t(a)] > votes[size_t(b)]; });

    std::vector<CandidateHypotheses> candidates;
    candidates.reserve(candidate_ids.size());
    for (int model_id : candidate_ids) {
        const LibraryModel& model = library.models[size_t(model_id)];
        std::vector<TransformHypothesis> hyps;
        for (const FeatureCorrespondence& corr : correspondences) {
            if (corr.model_id != model_id) continue;
            const SceneFeature& sf = features[size_t(corr.scene_feature_id)];
            const ModelFeatureRecord& mf = model.features[size_t(corr.model_feature_id)];
            TransformHypothesis h = hypothesize(sf.position, sf.lrf, mf.position, mf.lrf);
            h.model_id = model_id;
            h.scene_feature_id = corr.scene_feature_id;
            h.model_feature_id = corr.model_feature_id;
            h.feature_distance = corr.distance;
            hyps.push_back(h);
        }
        CandidateHypotheses cand;
        cand.model_id = model_id;
        cand.clusters =
            cluster_hypotheses(hyps, params.tau_a_radians, params.tau_t_mr * model.resolution);
        candidates.push_back(std::move(cand));
    }

    return verify_and_segment(scene, library, candidates, params.verify);
}

OcclusionResult occlusion(const TriangleMesh& model, const TriangleMesh& scene,
                          const GroundTruthPose& pose) {
    const double radius = 2.0 * mesh_resolution(model);

    std::vector<uint8_t> matched(model.vertices.size(), 0);
    if (!scene.vertices.empty()) {
        const KdTree scene_tree = KdTree::from_points(scene.vertices);
        parallel_for(model.vertices.size(), [&](size_t i) {
            const Vec3 q = transform_point(model.vertices[i], pose.rotation, pose.translation);
            if (scene_tree.nearest(q, radius).index >= 0) matched[i] = 1;
        });
    }

    double total = 0.0, visible = 0.0;
    for (const auto& t : model.triangles) {
        const double area =
            triangle_area(model.vertices[t[0]], model.vertices[t[1]], model.vertices[t[2]]);
        total += area;
        if (matched[t[0]] && matched[t[1]] && matched[t[2]]) visible += area;
    }

    OcclusionResult out;
    out.visible_fraction = total > 0.0 ? visible / total : 0.0;
    out.occlusion = 1.0 - out.visible_fraction;
    return out;
}

} // namespace rops
