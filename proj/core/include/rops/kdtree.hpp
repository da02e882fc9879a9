#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rops/geometry.hpp"

namespace rops {

/// Exact k-d tree over fixed-dimension points, used both for 3-d vertex
/// queries and for high-dimensional descriptor search. Backtracking is
/// complete, so results are identical to a brute-force scan, including the
/// tie rule: equal distances are resolved toward the lexicographically
/// smaller (label_a, label_b) pair.
class KdTree {
public:
    struct Label {
        int a = 0;
        int b = 0;
    };

    struct Neighbor {
        int index = -1;
        double sq_dist = std::numeric_limits<double>::infinity();
    };

    KdTree() = default;

    /// `points` is row-major n x dim. Labels default to (0, row index).
    KdTree(std::vector<double> points, int dim, std::vector<Label> labels = {});

    static KdTree from_points(std::span<const Vec3> pts);

    int size() const { return count_; }
    int dim() const { return dim_; }
    const Label& label(int index) const { return labels_[index]; }
    std::span<const double> point(int index) const;

    /// Nearest neighbor, optionally capped: entries farther than
    /// `max_dist` are ignored (index stays -1 when none qualify).
    Neighbor nearest(std::span<const double> query,
                     double max_dist = std::numeric_limits<double>::infinity()) const;
    Neighbor nearest(const Vec3& query,
                     double max_dist = std::numeric_limits<double>::infinity()) const;

    /// Exact first and second nearest neighbors ([0] is nearest).
    std::array<Neighbor, 2> two_nearest(std::span<const double> query) const;
    std::array<Neighbor, 2> two_nearest(const Vec3& query) const;

    /// Indices of all points with distance <= radius, ascending index order.
    std::vector<int> radius_indices(std::span<const double> query, double radius) const;
    std::vector<int> radius_indices(const Vec3& query, double radius) const;

private:
    struct Node {
        int axis = -1;   // -1 marks a leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
        int begin = 0;
        int end = 0;
    };

    int build_node(int begin, int end);
    const double* coords(int index) const { return points_.data() + size_t(index) * dim_; }
    double sq_dist_to(std::span<const double> q, int index) const;

    template <typename Visitor>
    void search(const Node& node, std::span<const double> q, Visitor&& visit,
                const double* bound) const;

    std::vector<double> points_;
    std::vector<Label> labels_;
    std::vector<int> perm_;
    std::vector<Node> nodes_;
    int dim_ = 0;
    int count_ = 0;
    int root_ = -1;
};

} // namespace rops
