#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rops/kdtree.hpp"
#include "rops/mesh.hpp"

namespace rops {

struct LabeledDescriptor {
    std::vector<double> values;
    int model_id = 0;
    int feature_id = 0;
};

struct FeatureCorrespondence {
    int scene_feature_id = -1;
    int model_id = -1;
    int model_feature_id = -1;
    double distance = 0.0;
    /// nearest / second-nearest distance; 0 when the nearest distance is 0.
    double ratio = 0.0;
};

/// Exact 2-nearest-neighbor search over labeled descriptors. Equal
/// distances resolve toward the lower (model_id, feature_id), so results do
/// not depend on insertion order.
class DescriptorIndex {
public:
    DescriptorIndex() = default;
    /// Throws ConfigError with fewer than 2 entries (the ratio test needs a
    /// second neighbor) or on inconsistent lengths.
    explicit DescriptorIndex(std::vector<LabeledDescriptor> entries);

    int size() const { return int(entries_.size()); }
    int dim() const { return dim_; }
    const LabeledDescriptor& entry(int i) const { return entries_[size_t(i)]; }

    struct TwoNearest {
        int first = -1;        // entry index of the nearest
        double first_dist = 0; // Euclidean distance
        int second = -1;
        double second_dist = 0;
    };
    TwoNearest two_nearest(std::span<const double> query) const;

private:
    std::vector<LabeledDescriptor> entries_;
    KdTree tree_;
    int dim_ = 0;
};

/// Ratio-test matching: a correspondence is produced iff
/// nearest/second-nearest < tau_f.
std::optional<FeatureCorrespondence> match_features(const DescriptorIndex& index,
                                                    std::span<const double> query, double tau_f,
                                                    int scene_feature_id = -1);

/// A located feature: descriptor plus the physical position it describes.
struct LocatedFeature {
    Vec3 position;
    std::vector<double> descriptor;
};

struct RPCurvePoint {
    double threshold = 0.0;
    double recall = 0.0;
    double one_minus_precision = 0.0;
    long true_positives = 0;
    long false_positives = 0;
    long total_positives = 0;
    long total_matches = 0;
};

/// Recall vs 1-precision sweep. A match is a true positive when the scene
/// feature lies within `location_tolerance` of the matched model feature
/// mapped through the ground-truth pose. "Total positives" counts scene
/// features that have any in-tolerance model counterpart.
std::vector<RPCurvePoint> rp_curve(const std::vector<LocatedFeature>& scene_features,
                                   const std::vector<LocatedFeature>& model_features,
                                   const GroundTruthPose& gt, double location_tolerance,
                                   std::span<const double> thresholds);

/// CSV with header "threshold,recall,one_minus_precision,tp,fp,positives,matches".
void save_rp_curve_csv(const std::vector<RPCurvePoint>& points, const std::string& path);

} // namespace rops
