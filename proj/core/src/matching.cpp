#include "rops/matching.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rops/error.hpp"
#include "rops/parallel.hpp"

namespace rops {

DescriptorIndex::DescriptorIndex(std::vector<LabeledDescriptor> entries)
    : entries_(std::move(entries)) {
    if (entries_.size() < 2)
        throw ConfigError("descriptor index needs at least 2 entries for 2-NN queries");
    dim_ = int(entries_[0].values.size());
    if (dim_ == 0) throw ConfigError("descriptor index entries must be non-empty vectors");

    std::vector<double> flat;
    flat.reserve(entries_.size() * size_t(dim_));
    std::vector<KdTree::Label> labels;
    labels.reserve(entries_.size());
    for (const LabeledDescriptor& e : entries_) {
        if (int(e.values.size()) != dim_)
            throw ConfigError("descriptor index entries must share one length");
        flat.insert(flat.end(), e.values.begin(), e.values.end());
        labels.push_back({e.model_id, e.feature_id});
    }
    tree_ = KdTree(std::move(flat), dim_, std::move(labels));
}

DescriptorIndex::TwoNearest DescriptorIndex::two_nearest(std::span<const double> query) const {
    if (int(query.size()) != dim_) throw ConfigError("query descriptor length mismatch");
    const auto nn = tree_.two_nearest(query);
    TwoNearest out;
    out.first = nn[0].index;
    out.second = nn[1].index;
    if (out.first >= 0) out.first_dist = std::sqrt(nn[0].sq_dist);
    if (out.second >= 0) out.second_dist = std::sqrt(nn[1].sq_dist);
    return out;
}

std::optional<FeatureCorrespondence> match_features(const DescriptorIndex& index,
                                                    std::span<const double> query, double tau_f,
                                                    int scene_feature_id) {
    if (!(tau_f > 0.0) || tau_f > 1.0) throw ConfigError("tau_f must be in (0, 1]");
    const auto nn = index.two_nearest(query);
    if (nn.first < 0 || nn.second < 0) return std::nullopt;

    const double ratio = nn.first_dist == 0.0
                             ? 0.0
                             : (nn.second_dist == 0.0 ? 0.0 : nn.first_dist / nn.second_dist);
    if (!(ratio < tau_f)) return std::nullopt;

    const LabeledDescriptor& best = index.entry(nn.first);
    FeatureCorrespondence corr;
    corr.scene_feature_id = scene_feature_id;
    corr.model_id = best.model_id;
    corr.model_feature_id = best.feature_id;
    corr.distance = nn.first_dist;
    corr.ratio = ratio;
    return corr;
}

std::vector<RPCurvePoint> rp_curve(const std::vector<LocatedFeature>& scene_features,
                                   const std::vector<LocatedFeature>& model_features,
                                   const GroundTruthPose& gt, double location_tolerance,
                                   std::span<const double> thresholds) {
    if (!(location_tolerance > 0.0)) throw ConfigError("location tolerance must be positive");
    if (model_features.size() < 2)
        throw ConfigError("rp_curve needs at least 2 model features");

    std::vector<LabeledDescriptor> entries;
    entries.reserve(model_features.size());
    std::vector<Vec3> mapped;
    mapped.reserve(model_features.size());
    for (size_t j = 0; j < model_features.size(); ++j) {
        entries.push_back({model_features[j].descriptor, 0, int(j)});
        mapped.push_back(transform_point(model_features[j].position, gt.rotation, gt.translation));
    }
    const DescriptorIndex index(std::move(entries));
    const KdTree position_tree = KdTree::from_points(mapped);

    // Per scene feature, threshold-independent facts: the match ratio, the
    // matched feature's physical error, and whether any in-tolerance model
    // counterpart exists at all.
    struct PerFeature {
        double ratio = 2.0; // > 1: no 2-NN result
        bool match_is_tp = false;
        bool has_positive = false;
    };
    std::vector<PerFeature> facts(scene_features.size());
    parallel_for(scene_features.size(), [&](size_t i) {
        const LocatedFeature& s = scene_features[i];
        PerFeature f;
        const auto nn = index.two_nearest(s.descriptor);
        if (nn.first >= 0 && nn.second >= 0) {
            f.ratio = nn.first_dist == 0.0
                          ? 0.0
                          : (nn.second_dist == 0.0 ? 0.0 : nn.first_dist / nn.second_dist);
            const Vec3& model_pos = mapped[size_t(index.entry(nn.first).feature_id)];
            f.match_is_tp = norm(s.position - model_pos) < location_tolerance;
        }
        const auto near = position_tree.nearest(s.position);
        f.has_positive = near.index >= 0 && std::sqrt(near.sq_dist) < location_tolerance;
        facts[i] = f;
    });

    long total_positives = 0;
    for (const PerFeature& f : facts)
        if (f.has_positive) ++total_positives;

    std::vector<RPCurvePoint> out;
    out.reserve(thresholds.size());
    for (double tau : thresholds) {
        RPCurvePoint pt;
        pt.threshold = tau;
        pt.total_positives = total_positives;
        for (const PerFeature& f : facts) {
            if (!(f.ratio < tau)) continue;
            ++pt.total_matches;
            if (f.match_is_tp)
                ++pt.true_positives;
            else
                ++pt.false_positives;
        }
        pt.recall = pt.total_positives > 0 ? double(pt.true_positives) / double(pt.total_positives)
                                           : 0.0;
        pt.one_minus_precision =
            pt.total_matches > 0 ? double(pt.false_positives) / double(pt.total_matches) : 0.0;
        out.push_back(pt);
    }
    return out;
}

void save_rp_curve_csv(const std::vector<RPCurvePoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "threshold,recall,one_minus_precision,tp,fp,positives,matches\n";
    char buf[160];
    for (const RPCurvePoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%ld,%ld,%ld,%ld\n", p.threshold,
                      p.recall, p.one_minus_precision, p.true_positives, p.false_positives,
                      p.total_positives, p.total_matches);
        out << buf;
    }
    if (!out) throw ParseError("write failed for '" + path + "'");
}

} // namespace rops
