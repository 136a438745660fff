#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lshart/neighbor_index.hpp"

namespace lshart {

/// Incremental k-d tree with axis cycling (depth mod d). Points are never
/// rebalanced; queries backtrack fully, so `nearest` is exact.
class KdTree {
public:
    explicit KdTree(std::size_t dims) : store_(dims) {}

    struct Neighbor {
        Point point;
        double distance;
    };

    void insert(std::span<const double> p);
    std::optional<Neighbor> nearest(std::span<const double> q) const;
    /// Exact nearest distance, +infinity for an empty tree.
    double nearest_distance(std::span<const double> q) const;

    std::size_t size() const noexcept { return store_.size(); }
    std::size_t dims() const noexcept { return store_.dims(); }
    /// Points in in-order (left, node, right) traversal order.
    std::vector<Point> in_order() const;
    std::size_t depth() const;

private:
    // Squared distance and store id of the nearest point; requires a non-empty tree.
    std::pair<double, std::uint32_t> search(std::span<const double> q) const;

    struct Node {
        std::uint32_t point;
        std::uint32_t axis;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    PointStore store_;
    std::vector<Node> nodes_;
};

inline void kd_insert(KdTree& tree, std::span<const double> p) { tree.insert(p); }
inline std::optional<Point> kd_nn(const KdTree& tree, std::span<const double> q) {
    auto n = tree.nearest(q);
    if (!n) return std::nullopt;
    return std::move(n->point);
}

class KdTreeIndex final : public NeighborIndex {
public:
    explicit KdTreeIndex(std::size_t dims) : tree_(dims) {}

    void insert(std::span<const double> p) override { tree_.insert(p); }
    double nearest_distance(std::span<const double> q) const override { return tree_.nearest_distance(q); }
    std::size_t size() const noexcept override { return tree_.size(); }

    const KdTree& tree() const noexcept { return tree_; }

private:
    KdTree tree_;
};

}  // namespace lshart
