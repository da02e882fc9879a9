// rops3d: command-line front end for the local-feature toolkit.
// Subcommands: build-library, describe, lrf-error, rp-curve, synth-scene,
// recognize, sweep-params. Every command is deterministic given its inputs
// and --seed; outputs are written to a temp name and renamed on success.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rops/error.hpp"
#include "rops/experiments.hpp"
#include "rops/library_io.hpp"
#include "rops/mesh_io.hpp"
#include "rops/parallel.hpp"
#include "rops/recognition.hpp"
#include "rops/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExperimentConfig {
    std::vector<std::string> models;
    std::vector<std::string> scenes;
    std::vector<std::string> gt;
    std::string library;
    std::string out;
    std::string out_dir = ".";
    uint64_t seed = 1;

    // descriptor parameters
    int bins = 5;
    int rotations = 3;
    double radius_mr = 15.0;
    int combination = 6;
    std::string schedule = "full";

    // library / detection
    int seeds = 500;
    double rho_mr = 2.0;
    double tau_lambda = 1.2;
    double scene_decimation = 0.125;

    // matching / clustering / verification
    double tau_f = 0.8;
    double tau_a = 0.2;
    double tau_t_mr = 30.0;
    double eps1_mr = 0.75;
    double eps2_mr = 1.5;
    double alpha1 = 0.04;
    double alpha2 = 0.2;
    int min_scene_points = 100;
    double icp_rejection_mr = 4.0;
    int icp_max_iters = 50;
    double icp_tol_mr = 1e-4;

    // nuisances and protocol knobs
    std::vector<double> noise_mr = {0.0};
    std::vector<double> decimation = {1.0};
    int pairs = 1000;
    int count = 3;
    int points = 1000;
    double max_corr_mr = 2.0;
    double location_tol_mr = 2.0;
    double rot_tol_deg = 5.0;
    double trans_tol_mr = 5.0;
    std::vector<double> thresholds;

    // sweep-params
    std::string sweep = "combination";
    std::vector<double> values;

    // synth-scene output format
    bool binary = false;
};

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw rops::ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw rops::ConfigError("config json: " + std::string(e.what()));
    }
    if (!j.is_object()) throw rops::ConfigError("config must be a flat json object");

    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const json::exception&) {
                throw rops::ConfigError(std::string("config key '") + key + "' has a wrong type");
            }
        }
    };
    get("models", cfg.models);
    get("scenes", cfg.scenes);
    get("gt", cfg.gt);
    get("library", cfg.library);
    get("out", cfg.out);
    get("out_dir", cfg.out_dir);
    get("seed", cfg.seed);
    get("bins", cfg.bins);
    get("rotations", cfg.rotations);
    get("radius_mr", cfg.radius_mr);
    get("combination", cfg.combination);
    get("schedule", cfg.schedule);
    get("seeds", cfg.seeds);
    get("rho_mr", cfg.rho_mr);
    get("tau_lambda", cfg.tau_lambda);
    get("scene_decimation", cfg.scene_decimation);
    get("tau_f", cfg.tau_f);
    get("tau_a", cfg.tau_a);
    get("tau_t_mr", cfg.tau_t_mr);
    get("eps1_mr", cfg.eps1_mr);
    get("eps2_mr", cfg.eps2_mr);
    get("alpha1", cfg.alpha1);
    get("alpha2", cfg.alpha2);
    get("min_scene_points", cfg.min_scene_points);
    get("icp_rejection_mr", cfg.icp_rejection_mr);
    get("icp_max_iters", cfg.icp_max_iters);
    get("icp_tol_mr", cfg.icp_tol_mr);
    get("noise_mr", cfg.noise_mr);
    get("decimation", cfg.decimation);
    get("pairs", cfg.pairs);
    get("count", cfg.count);
    get("points", cfg.points);
    get("max_corr_mr", cfg.max_corr_mr);
    get("location_tol_mr", cfg.location_tol_mr);
    get("rot_tol_deg", cfg.rot_tol_deg);
    get("trans_tol_mr", cfg.trans_tol_mr);
    get("thresholds", cfg.thresholds);
    get("sweep", cfg.sweep);
    get("values", cfg.values);
    get("binary", cfg.binary);
}

rops::RopsParams rops_params(const ExperimentConfig& cfg) {
    rops::RopsParams p;
    p.bins = cfg.bins;
    p.rotations = cfg.rotations;
    p.support_radius_mr = cfg.radius_mr;
    p.combination = cfg.combination;
    if (cfg.schedule == "full")
        p.schedule = rops::RotationSchedule::UniformFullCircle;
    else if (cfg.schedule == "half")
        p.schedule = rops::RotationSchedule::UniformHalfCircle;
    else
        throw rops::ConfigError("schedule must be 'full' or 'half'");
    p.validate();
    return p;
}

rops::RecognitionParams recognition_params(const ExperimentConfig& cfg) {
    rops::RecognitionParams p;
    p.tau_f = cfg.tau_f;
    p.tau_lambda = cfg.tau_lambda;
    p.tau_a_radians = cfg.tau_a;
    p.tau_t_mr = cfg.tau_t_mr;
    p.scene_decimation = cfg.scene_decimation;
    p.resolution_control_rho_mr = cfg.rho_mr;
    p.verify.epsilon1_mr = cfg.eps1_mr;
    p.verify.epsilon2_mr = cfg.eps2_mr;
    p.verify.alpha1 = cfg.alpha1;
    p.verify.alpha2 = cfg.alpha2;
    p.verify.min_scene_points = cfg.min_scene_points;
    p.verify.icp.rejection_radius_mr = cfg.icp_rejection_mr;
    p.verify.icp.max_iterations = cfg.icp_max_iters;
    p.verify.icp.convergence_tol_mr = cfg.icp_tol_mr;
    return p;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<rops::NamedMesh> load_models(const std::vector<std::string>& paths) {
    if (paths.empty()) throw rops::ConfigError("no model files given (--models)");
    std::vector<rops::NamedMesh> models;
    models.reserve(paths.size());
    for (const std::string& p : paths) {
        try {
            models.push_back({stem_of(p), rops::load_mesh(p)});
        } catch (const rops::Error& e) {
            throw rops::ParseError("model '" + p + "': " + e.what());
        }
    }
    return models;
}

/// Writes through a temporary name, renaming into place on success.
template <typename WriteFn>
void atomic_output(const std::string& path, WriteFn&& write_fn) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    write_fn(tmp);
    fs::rename(tmp, path);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- subcommands -----------------------------------------------------------

int cmd_build_library(const ExperimentConfig& cfg) {
    const auto models = load_models(cfg.models);
    const rops::ModelLibrary library = rops::build_model_library(
        models, cfg.seeds, rops_params(cfg), {.resolution_control_rho_mr = cfg.rho_mr});
    const std::string out = cfg.out.empty() ? out_path(cfg, "library.rops") : cfg.out;
    atomic_output(out, [&](const std::string& tmp) { rops::save_library(library, tmp); });
    for (const rops::LibraryModel& m : library.models) {
        std::cout << m.name << ": " << m.features.size() << " features";
        if (m.degenerate_skipped > 0)
            std::cout << " (" << m.degenerate_skipped << " degenerate seeds skipped)";
        std::cout << "\n";
    }
    std::cout << "library written to " << out << "\n";
    return 0;
}

int cmd_describe(const ExperimentConfig& cfg) {
    const auto models = load_models(cfg.models);
    const rops::RopsParams params = rops_params(cfg);
    const rops::ModelLibrary library = rops::build_model_library(
        models, cfg.seeds, params, {.resolution_control_rho_mr = cfg.rho_mr});

    for (const rops::LibraryModel& model : library.models) {
        const std::string csv = out_path(cfg, model.name + ".descriptors.csv");
        atomic_output(csv, [&](const std::string& tmp) {
            std::ofstream out(tmp);
            if (!out) throw rops::ParseError("cannot write '" + tmp + "'");
            out << "feature_id,x,y,z";
            for (int i = 0; i < params.descriptor_length(); ++i) out << ",f" << i;
            out << "\n";
            for (size_t f = 0; f < model.features.size(); ++f) {
                const auto& rec = model.features[f];
                out << f << ',' << format_double(rec.position.x) << ','
                    << format_double(rec.position.y) << ',' << format_double(rec.position.z);
                for (double v : rec.descriptor) out << ',' << format_double(v);
                out << "\n";
            }
            if (!out) throw rops::ParseError("write failed for '" + tmp + "'");
        });

        const std::string sidecar = out_path(cfg, model.name + ".params.json");
        atomic_output(sidecar, [&](const std::string& tmp) {
            json j;
            j["L"] = params.bins;
            j["T"] = params.rotations;
            j["r_mr"] = params.support_radius_mr;
            j["combination"] = params.combination;
            j["schedule"] = cfg.schedule;
            std::ofstream out(tmp);
            out << j.dump(2) << "\n";
        });
        std::cout << model.name << ": " << model.features.size() << " descriptors -> " << csv
                  << "\n";
    }
    return 0;
}

int cmd_lrf_error(const ExperimentConfig& cfg) {
    const auto models = load_models(cfg.models);
    rops::LrfErrorOptions opts;
    opts.decimation = cfg.decimation.front();
    opts.noise_sigma_mr = cfg.noise_mr.front();
    opts.pairs = cfg.pairs;
    opts.seed = cfg.seed;
    opts.support_radius_mr = cfg.radius_mr;
    opts.max_correspondence_mr = cfg.max_corr_mr;

    rops::LrfErrorResult merged;
    for (const rops::NamedMesh& model : models) {
        const rops::LrfErrorResult res = rops::lrf_error_experiment(model.mesh, opts);
        std::cout << model.name << ": fraction below 10 deg = " << res.fraction_below_10deg
                  << " (" << res.used_pairs << " pairs)\n";
        merged.merge(res);
    }
    std::cout << "overall fraction below 10 deg = " << merged.fraction_below_10deg << "\n";

    const std::string out = cfg.out.empty() ? out_path(cfg, "lrf_error_hist.csv") : cfg.out;
    atomic_output(out, [&](const std::string& tmp) { rops::save_lrf_histogram_csv(merged, tmp); });
    std::cout << "histogram written to " << out << "\n";
    return 0;
}

int cmd_rp_curve(const ExperimentConfig& cfg) {
    const auto named = load_models(cfg.models);
    std::vector<rops::TriangleMesh> models;
    for (const auto& nm : named) models.push_back(nm.mesh);

    rops::RpExperimentOptions opts;
    opts.rops = rops_params(cfg);
    opts.feature_points_per_model = cfg.points;
    opts.scene_models = cfg.count;
    opts.max_correspondence_mr = cfg.max_corr_mr;
    opts.location_tolerance_mr = cfg.location_tol_mr;
    opts.thresholds = cfg.thresholds;
    opts.seed = cfg.seed;

    if (!cfg.scenes.empty()) {
        if (cfg.gt.size() != cfg.scenes.size())
            throw rops::ConfigError("rp-curve needs one --gt file per scene");
        for (size_t s = 0; s < cfg.scenes.size(); ++s) {
            const rops::TriangleMesh scene = rops::load_mesh(cfg.scenes[s]);
            const auto poses = rops::load_ground_truth(cfg.gt[s]);
            const auto result = rops::rp_experiment_on_scene(models, scene, poses, opts);
            const std::string out = out_path(cfg, "rp_" + stem_of(cfg.scenes[s]) + ".csv");
            atomic_output(out, [&](const std::string& tmp) {
                rops::save_rp_curve_csv(result.points, tmp);
            });
            std::cout << cfg.scenes[s] << ": " << result.descriptor_pairs
                      << " descriptor pairs -> " << out << "\n";
        }
        return 0;
    }

    for (double decim : cfg.decimation) {
        for (double sigma : cfg.noise_mr) {
            opts.noise_sigma_mr = sigma;
            opts.decimation = decim;
            const auto result = rops::rp_experiment(models, opts);
            std::ostringstream name;
            name << "rp_noise" << sigma << "_decim" << decim << ".csv";
            const std::string out = out_path(cfg, name.str());
            atomic_output(out, [&](const std::string& tmp) {
                rops::save_rp_curve_csv(result.points, tmp);
            });
            std::cout << "noise " << sigma << "mr, decimation " << decim << ": "
                      << result.descriptor_pairs << " descriptor pairs -> " << out << "\n";
        }
    }
    return 0;
}

int cmd_synth_scene(const ExperimentConfig& cfg) {
    const auto named = load_models(cfg.models);
    std::vector<rops::TriangleMesh> models;
    double ref_mr = 0.0;
    for (const auto& nm : named) {
        models.push_back(nm.mesh);
        ref_mr += rops::mesh_resolution(nm.mesh);
    }
    ref_mr /= double(models.size());

    rops::ComposedScene composed = rops::compose_scene(models, cfg.count, cfg.seed);
    rops::TriangleMesh scene = std::move(composed.scene);
    const double decim = cfg.decimation.front();
    const double sigma = cfg.noise_mr.front();
    if (decim < 1.0) scene = rops::decimate(scene, decim);
    if (sigma > 0.0) {
        const double sigma_scene = sigma * ref_mr / rops::mesh_resolution(scene);
        scene = rops::add_gaussian_noise(scene, sigma_scene, cfg.seed + 1);
    }

    const std::string prefix = cfg.out.empty() ? out_path(cfg, "scene") : cfg.out;
    const std::string mesh_path = prefix + ".ply";
    const std::string gt_path = prefix + ".gt.json";
    atomic_output(mesh_path, [&](const std::string& tmp) {
        rops::save_ply(scene, tmp,
                       cfg.binary ? rops::PlyFormat::BinaryLittleEndian : rops::PlyFormat::Ascii);
    });
    atomic_output(gt_path, [&](const std::string& tmp) {
        rops::save_ground_truth(composed.poses, tmp);
    });
    std::cout << "scene with " << composed.poses.size() << " instances, "
              << scene.vertices.size() << " vertices -> " << mesh_path << ", " << gt_path << "\n";
    return 0;
}

int cmd_recognize(const ExperimentConfig& cfg) {
    if (cfg.library.empty()) throw rops::ConfigError("recognize needs --library");
    if (cfg.scenes.empty()) throw rops::ConfigError("recognize needs at least one --scenes file");
    if (!cfg.gt.empty() && cfg.gt.size() != cfg.scenes.size())
        throw rops::ConfigError("recognize: --gt count must match --scenes");

    rops::ModelLibrary library = rops::load_library(cfg.library);
    rops::attach_meshes(library, load_models(cfg.models));
    const rops::RecognitionParams params = recognition_params(cfg);
    const bool have_gt = !cfg.gt.empty();

    struct Row {
        std::string scene;
        int instances = 0;
        int expected = 0;
        int recognized = 0;
        int false_positives = 0;
        double mean_rot = 0.0;
        double mean_trans = 0.0;
    };
    std::vector<Row> rows;

    for (size_t s = 0; s < cfg.scenes.size(); ++s) {
        const rops::TriangleMesh scene = rops::load_mesh(cfg.scenes[s]);
        const rops::RecognitionResult result = rops::recognize(scene, library, params);

        const std::string result_path = out_path(cfg, stem_of(cfg.scenes[s]) + ".result.json");
        atomic_output(result_path, [&](const std::string& tmp) {
            rops::save_recognition_result(result, tmp);
        });

        Row row;
        row.scene = stem_of(cfg.scenes[s]);
        row.instances = int(result.instances.size());
        if (have_gt) {
            const auto gt = rops::load_ground_truth(cfg.gt[s]);
            const rops::SceneEvaluation eval = rops::evaluate_recognition(
                result, gt, library, cfg.rot_tol_deg, cfg.trans_tol_mr);
            row.expected = eval.expected;
            row.recognized = eval.recognized;
            row.false_positives = eval.false_positives;
            for (const rops::PoseErrors& e : eval.matched_errors) {
                row.mean_rot += e.rotation_deg;
                row.mean_trans += e.translation_mr;
            }
            if (!eval.matched_errors.empty()) {
                row.mean_rot /= double(eval.matched_errors.size());
                row.mean_trans /= double(eval.matched_errors.size());
            }
        }
        rows.push_back(row);
        std::cout << row.scene << ": " << row.instances << " instances -> " << result_path
                  << "\n";
    }

    const std::string summary = out_path(cfg, "recognition_summary.csv");
    atomic_output(summary, [&](const std::string& tmp) {
        std::ofstream out(tmp);
        if (!out) throw rops::ParseError("cannot write '" + tmp + "'");
        if (have_gt) {
            out << "scene,instances,expected,recognized,false_positives,rate,"
                   "mean_rot_err_deg,mean_trans_err_mr\n";
            for (const Row& r : rows) {
                const double rate = r.expected > 0 ? double(r.recognized) / r.expected : 0.0;
                out << r.scene << ',' << r.instances << ',' << r.expected << ',' << r.recognized
                    << ',' << r.false_positives << ',' << format_double(rate) << ','
                    << format_double(r.mean_rot) << ',' << format_double(r.mean_trans) << "\n";
            }
        } else {
            out << "scene,instances\n";
            for (const Row& r : rows) out << r.scene << ',' << r.instances << "\n";
        }
        if (!out) throw rops::ParseError("write failed for '" + tmp + "'");
    });
    if (have_gt) {
        long expected = 0, recognized = 0;
        for (const Row& r : rows) {
            expected += r.expected;
            recognized += r.recognized;
        }
        if (expected > 0)
            std::cout << "recognition rate: " << double(recognized) / double(expected) << " ("
                      << recognized << "/" << expected << ")\n";
    }
    std::cout << "summary written to " << summary << "\n";
    return 0;
}

int cmd_sweep_params(const ExperimentConfig& cfg) {
    const auto named = load_models(cfg.models);
    std::vector<rops::TriangleMesh> models;
    for (const auto& nm : named) models.push_back(nm.mesh);

    std::vector<double> values = cfg.values;
    if (values.empty()) {
        if (cfg.sweep == "combination")
            values = {1, 2, 3, 4, 5, 6, 7, 8};
        else if (cfg.sweep == "bins")
            values = {3, 5, 7, 9};
        else if (cfg.sweep == "rotations")
            values = {1, 2, 3, 4, 5, 6};
        else if (cfg.sweep == "radius")
            values = {5, 10, 15, 20, 25};
        else
            throw rops::ConfigError("sweep must be combination|bins|rotations|radius");
    }

    struct SummaryRow {
        double value;
        double auc;
        double recall_at_1;
        double one_minus_precision_at_1;
    };
    std::vector<SummaryRow> summary;

    for (double value : values) {
        rops::RpExperimentOptions opts;
        opts.rops = rops_params(cfg);
        opts.feature_points_per_model = cfg.points;
        opts.scene_models = cfg.count;
        opts.noise_sigma_mr = cfg.noise_mr.front();
        opts.decimation = cfg.decimation.front();
        opts.max_correspondence_mr = cfg.max_corr_mr;
        opts.location_tolerance_mr = cfg.location_tol_mr;
        opts.thresholds = cfg.thresholds;
        opts.seed = cfg.seed;

        if (cfg.sweep == "combination")
            opts.rops.combination = int(value);
        else if (cfg.sweep == "bins")
            opts.rops.bins = int(value);
        else if (cfg.sweep == "rotations")
            opts.rops.rotations = int(value);
        else if (cfg.sweep == "radius")
            opts.rops.support_radius_mr = value;
        else
            throw rops::ConfigError("sweep must be combination|bins|rotations|radius");
        opts.rops.validate();

        const auto result = rops::rp_experiment(models, opts);
        std::ostringstream name;
        name << "rp_" << cfg.sweep << "_" << value << ".csv";
        const std::string out = out_path(cfg, name.str());
        atomic_output(out, [&](const std::string& tmp) {
            rops::save_rp_curve_csv(result.points, tmp);
        });

        // Trapezoid AUC of recall over 1-precision, in threshold order.
        double auc = 0.0;
        for (size_t i = 1; i < result.points.size(); ++i) {
            const auto& a = result.points[i - 1];
            const auto& b = result.points[i];
            auc += 0.5 * (a.recall + b.recall) * (b.one_minus_precision - a.one_minus_precision);
        }
        const auto& last = result.points.back();
        summary.push_back({value, auc, last.recall, last.one_minus_precision});
        std::cout << cfg.sweep << " = " << value << ": recall@1 = " << last.recall
                  << ", 1-precision@1 = " << last.one_minus_precision << " -> " << out << "\n";
    }

    const std::string out = out_path(cfg, "sweep_summary.csv");
    atomic_output(out, [&](const std::string& tmp) {
        std::ofstream f(tmp);
        if (!f) throw rops::ParseError("cannot write '" + tmp + "'");
        f << "param,value,auc,recall_at_1,one_minus_precision_at_1\n";
        for (const SummaryRow& row : summary)
            f << cfg.sweep << ',' << format_double(row.value) << ',' << format_double(row.auc)
              << ',' << format_double(row.recall_at_1) << ','
              << format_double(row.one_minus_precision_at_1) << "\n";
    });
    std::cout << "sweep summary written to " << out << "\n";
    return 0;
}

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat JSON config; flags override its values");
    cmd->add_option("--seed", cfg.seed, "RNG seed (all randomness flows from it)");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
    cmd->add_option("--out", cfg.out, "output file (or prefix, for synth-scene)");
    cmd->add_option("--bins", cfg.bins, "distribution matrix bins per side (L)");
    cmd->add_option("--rotations", cfg.rotations, "rotations per axis (T)");
    cmd->add_option("--radius-mr", cfg.radius_mr, "support radius in mesh-resolution units");
    cmd->add_option("--combination", cfg.combination, "statistics combination id, 1..8");
    cmd->add_option("--schedule", cfg.schedule, "rotation schedule: full|half");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RoPS local features and hierarchical 3D object recognition"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_path;

    auto* build = app.add_subcommand("build-library", "sample model features into a library file");
    build->add_option("--models", cfg.models, "model mesh files (ply/obj)")->expected(-1);
    build->add_option("--seeds", cfg.seeds, "seed points per model (N_m)");
    build->add_option("--rho-mr", cfg.rho_mr, "resolution-control radius in model mr");
    add_common_options(build, cfg, config_path);

    auto* describe = app.add_subcommand("describe", "dump per-model descriptors as CSV");
    describe->add_option("--models", cfg.models, "model mesh files")->expected(-1);
    describe->add_option("--seeds", cfg.seeds, "seed points per model (N_m)");
    describe->add_option("--rho-mr", cfg.rho_mr, "resolution-control radius in model mr");
    add_common_options(describe, cfg, config_path);

    auto* lrf = app.add_subcommand("lrf-error", "frame repeatability histogram under nuisances");
    lrf->add_option("--models", cfg.models, "model mesh files")->expected(-1);
    lrf->add_option("--pairs", cfg.pairs, "sampled correspondences per model");
    lrf->add_option("--noise-mr", cfg.noise_mr, "noise sigma in model mr")->expected(-1);
    lrf->add_option("--decimation", cfg.decimation, "scene decimation fraction")->expected(-1);
    lrf->add_option("--max-corr-mr", cfg.max_corr_mr, "correspondence distance cutoff (mr)");
    add_common_options(lrf, cfg, config_path);

    auto* rp = app.add_subcommand("rp-curve", "recall vs 1-precision for descriptor matching");
    rp->add_option("--models", cfg.models, "model mesh files")->expected(-1);
    rp->add_option("--scenes", cfg.scenes, "scene mesh files (else synthesized)")->expected(-1);
    rp->add_option("--gt", cfg.gt, "ground-truth json per scene")->expected(-1);
    rp->add_option("--points", cfg.points, "feature points sampled per model instance");
    rp->add_option("--count", cfg.count, "instances per synthesized scene");
    rp->add_option("--noise-mr", cfg.noise_mr, "noise sigmas to sweep")->expected(-1);
    rp->add_option("--decimation", cfg.decimation, "decimation fractions to sweep")->expected(-1);
    rp->add_option("--thresholds", cfg.thresholds, "ratio thresholds")->expected(-1);
    rp->add_option("--max-corr-mr", cfg.max_corr_mr, "correspondence distance cutoff (mr)");
    rp->add_option("--location-tol-mr", cfg.location_tol_mr, "true-positive location tolerance");
    add_common_options(rp, cfg, config_path);

    auto* synth = app.add_subcommand("synth-scene", "compose a random scene with ground truth");
    synth->add_option("--models", cfg.models, "model mesh files")->expected(-1);
    synth->add_option("--count", cfg.count, "number of instances (3..5 in the experiments)");
    synth->add_option("--noise-mr", cfg.noise_mr, "noise sigma in model mr")->expected(-1);
    synth->add_option("--decimation", cfg.decimation, "decimation fraction")->expected(-1);
    synth->add_flag("--binary", cfg.binary, "write binary_little_endian PLY");
    add_common_options(synth, cfg, config_path);

    auto* rec = app.add_subcommand("recognize", "run the recognition pipeline on scenes");
    rec->add_option("--library", cfg.library, "library file from build-library");
    rec->add_option("--models", cfg.models, "model mesh files (names must match the library)")
        ->expected(-1);
    rec->add_option("--scenes", cfg.scenes, "scene mesh files")->expected(-1);
    rec->add_option("--gt", cfg.gt, "ground-truth json per scene (optional)")->expected(-1);
    rec->add_option("--tau-f", cfg.tau_f, "ratio-test threshold");
    rec->add_option("--tau-lambda", cfg.tau_lambda, "eigenvalue-ratio feature filter");
    rec->add_option("--tau-a", cfg.tau_a, "cluster Euler-angle radius (radians)");
    rec->add_option("--tau-t-mr", cfg.tau_t_mr, "cluster translation radius (model mr)");
    rec->add_option("--eps1-mr", cfg.eps1_mr, "strict residual threshold");
    rec->add_option("--eps2-mr", cfg.eps2_mr, "loose residual threshold");
    rec->add_option("--alpha1", cfg.alpha1, "strict visible-proportion threshold");
    rec->add_option("--alpha2", cfg.alpha2, "loose visible-proportion threshold");
    rec->add_option("--min-scene-points", cfg.min_scene_points, "stop when fewer points remain");
    rec->add_option("--scene-decimation", cfg.scene_decimation, "seed-selection decimation");
    rec->add_option("--rho-mr", cfg.rho_mr, "resolution-control radius (scene mr)");
    rec->add_option("--icp-rejection-mr", cfg.icp_rejection_mr, "ICP rejection radius");
    rec->add_option("--icp-max-iters", cfg.icp_max_iters, "ICP iteration cap");
    rec->add_option("--icp-tol-mr", cfg.icp_tol_mr, "ICP residual-change stop");
    rec->add_option("--rot-tol-deg", cfg.rot_tol_deg, "pose match tolerance (summary)");
    rec->add_option("--trans-tol-mr", cfg.trans_tol_mr, "pose match tolerance (summary)");
    add_common_options(rec, cfg, config_path);

    auto* sweep = app.add_subcommand("sweep-params", "RP curves over descriptor parameter sweeps");
    sweep->add_option("--models", cfg.models, "model mesh files")->expected(-1);
    sweep->add_option("--sweep", cfg.sweep, "combination|bins|rotations|radius");
    sweep->add_option("--values", cfg.values, "values to sweep")->expected(-1);
    sweep->add_option("--points", cfg.points, "feature points per model instance");
    sweep->add_option("--count", cfg.count, "instances per synthesized scene");
    sweep->add_option("--noise-mr", cfg.noise_mr, "noise sigma")->expected(-1);
    sweep->add_option("--decimation", cfg.decimation, "decimation fraction")->expected(-1);
    add_common_options(sweep, cfg, config_path);

    // Two-phase parse: --config first, then flags override.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                load_config_file(argv[i + 1], cfg);
            } catch (const rops::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
            break;
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build_library(cfg);
        if (describe->parsed()) return cmd_describe(cfg);
        if (lrf->parsed()) return cmd_lrf_error(cfg);
        if (rp->parsed()) return cmd_rp_curve(cfg);
        if (synth->parsed()) return cmd_synth_scene(cfg);
        if (rec->parsed()) return cmd_recognize(cfg);
        if (sweep->parsed()) return cmd_sweep_params(cfg);
    } catch (const rops::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
