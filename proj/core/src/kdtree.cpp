#include "rops/kdtree.hpp"

#include <algorithm>
#include <cmath>

#include "rops/error.hpp"

namespace rops {

namespace {
constexpr int kLeafSize = 12;

inline bool better(double sq_a, const KdTree::Label& la, double sq_b, const KdTree::Label& lb) {
    if (sq_a != sq_b) return sq_a < sq_b;
    if (la.a != lb.a) return la.a < lb.a;
    return la.b < lb.b;
}
} // namespace

KdTree::KdTree(std::vector<double> points, int dim, std::vector<Label> labels)
    : points_(std::move(points)), labels_(std::move(labels)), dim_(dim) {
    if (dim_ <= 0) throw ConfigError("kdtree: dimension must be positive");
    if (points_.size() % size_t(dim_) != 0)
        throw ConfigError("kdtree: point buffer size is not a multiple of dim");
    count_ = int(points_.size() / size_t(dim_));
    if (labels_.empty()) {
        labels_.resize(count_);
        for (int i = 0; i < count_; ++i) labels_[i] = {0, i};
    }
    if (int(labels_.size()) != count_) throw ConfigError("kdtree: label count mismatch");
    perm_.resize(count_);
    for (int i = 0; i < count_; ++i) perm_[i] = i;
    if (count_ > 0) root_ = build_node(0, count_);
}

KdTree KdTree::from_points(std::span<const Vec3> pts) {
    std::vector<double> flat;
    flat.reserve(pts.size() * 3);
    for (const Vec3& p : pts) {
        flat.push_back(p.x);
        flat.push_back(p.y);
        flat.push_back(p.z);
    }
    return KdTree(std::move(flat), 3);
}

std::span<const double> KdTree::point(int index) const {
    return {coords(index), size_t(dim_)};
}

int KdTree::build_node(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    const int id = int(nodes_.size());
    nodes_.push_back(node);

    if (end - begin <= kLeafSize) return id;

    // Split on the axis with the widest extent.
    int axis = 0;
    double best_extent = -1.0;
    for (int d = 0; d < dim_; ++d) {
        double lo = coords(perm_[begin])[d];
        double hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            const double v = coords(perm_[i])[d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_extent) {
            best_extent = hi - lo;
            axis = d;
        }
    }
    if (best_extent <= 0.0) return id; // all points identical: keep as leaf

    const int mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](int a, int b) {
                         const double ca = coords(a)[axis];
                         const double cb = coords(b)[axis];
                         if (ca != cb) return ca < cb;
                         return a < b;
                     });

    const double split = coords(perm_[mid])[axis];
    const int left = build_node(begin, mid);
    const int right = build_node(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree::sq_dist_to(std::span<const double> q, int index) const {
    const double* p = coords(index);
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
        const double diff = q[d] - p[d];
        s += diff * diff;
    }
    return s;
}

template <typename Visitor>
void KdTree::search(const Node& node, std::span<const double> q, Visitor&& visit,
                    const double* bound) const {
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) visit(perm_[i]);
        return;
    }
    const double delta = q[node.axis] - node.split;
    const Node& near_child = nodes_[delta < 0.0 ? node.left : node.right];
    const Node& far_child = nodes_[delta < 0.0 ? node.right : node.left];
    search(near_child, q, visit, bound);
    if (delta * delta <= *bound) search(far_child, q, visit, bound);
}

KdTree::Neighbor KdTree::nearest(std::span<const double> query, double max_dist) const {
    Neighbor best;
    double cap = max_dist < std::numeric_limits<double>::infinity()
                     ? max_dist * max_dist
                     : std::numeric_limits<double>::infinity();
    double bound_val = cap;
    const double* bound = &bound_val;
    if (root_ < 0) return best;
    auto visit = [&](int idx) {
        const double sq = sq_dist_to(query, idx);
        if (sq > cap) return;
        if (best.index < 0 || better(sq, labels_[idx], best.sq_dist, labels_[best.index])) {
            best = {idx, sq};
            bound_val = std::min(cap, sq);
        }
    };
    search(nodes_[root_], query, visit, bound);
    return best;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query, double max_dist) const {
    const double q[3] = {query.x, query.y, query.z};
    return nearest(std::span<const double>(q, 3), max_dist);
}

std::array<KdTree::Neighbor, 2> KdTree::two_nearest(std::span<const double> query) const {
    std::array<Neighbor, 2> best;
    double bound_val = std::numeric_limits<double>::infinity();
    const double* bound = &bound_val;
    if (root_ < 0) return best;
    auto visit = [&](int idx) {
        const double sq = sq_dist_to(query, idx);
        if (best[0].index < 0 || better(sq, labels_[idx], best[0].sq_dist, labels_[best[0].index])) {
            best[1] = best[0];
            best[0] = {idx, sq};
        } else if (best[1].index < 0 ||
                   better(sq, labels_[idx], best[1].sq_dist, labels_[best[1].index])) {
            best[1] = {idx, sq};
        }
        if (best[1].index >= 0) bound_val = best[1].sq_dist;
    };
    search(nodes_[root_], query, visit, bound);
    return best;
}

std::array<KdTree::Neighbor, 2> KdTree::two_nearest(const Vec3& query) const {
    const double q[3] = {query.x, query.y, query.z};
    return two_nearest(std::span<const double>(q, 3));
}

std::vector<int> KdTree::radius_indices(std::span<const double> query, double radius) const {
    std::vector<int> out;
    if (root_ < 0) return out;
    const double sq_radius = radius * radius;
    double bound_val = sq_radius;
    const double* bound = &bound_val;
    auto visit = [&](int idx) {
        if (sq_dist_to(query, idx) <= sq_radius) out.push_back(idx);
    };
    search(nodes_[root_], query, visit, bound);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> KdTree::radius_indices(const Vec3& query, double radius) const {
    const double q[3] = {query.x, query.y, query.z};
    return radius_indices(std::span<const double>(q, 3), radius);
}

} // namespace rops
