#include "lshart/kd_tree.hpp"

#include <cmath>
#include <utility>

#include "lshart/error.hpp"

namespace lshart {

void KdTree::insert(std::span<const double> p) {
    if (p.size() != store_.dims()) throw ContractViolation("kd-tree insert with the wrong dimension");
    const auto id = static_cast<std::uint32_t>(store_.size());
    store_.push_back(p);
    const auto d = static_cast<std::uint32_t>(store_.dims());

    if (nodes_.empty()) {
        nodes_.push_back({id, 0});
        return;
    }
    std::int32_t cur = 0;
    while (true) {
        Node& n = nodes_[static_cast<std::size_t>(cur)];
        const bool go_left = p[n.axis] < store_.row(n.point)[n.axis];
        const std::int32_t next = go_left ? n.left : n.right;
        if (next < 0) {
            const auto child = static_cast<std::int32_t>(nodes_.size());
            const std::uint32_t axis = (n.axis + 1) % d;
            if (go_left) {
                n.left = child;
            } else {
                n.right = child;
            }
            nodes_.push_back({id, axis});  // invalidates n
            return;
        }
        cur = next;
    }
}

std::pair<double, std::uint32_t> KdTree::search(std::span<const double> q) const {
    const std::size_t d = store_.dims();
    double best = kInfinity;
    std::uint32_t best_id = 0;

    // Explicit stack of (node, squared lower bound on distance to its region).
    std::vector<std::pair<std::int32_t, double>> stack;
    stack.reserve(64);
    stack.emplace_back(0, 0.0);
    while (!stack.empty()) {
        auto [idx, bound] = stack.back();
        stack.pop_back();
        if (bound >= best) continue;
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        const double* p = store_.row(n.point);
        const double s = squared_distance_unchecked(p, q.data(), d);
        if (s < best || (s == best && n.point < best_id)) {
            best = s;
            best_id = n.point;
        }
        const double diff = q[n.axis] - p[n.axis];
        const std::int32_t near = diff < 0.0 ? n.left : n.right;
        const std::int32_t far = diff < 0.0 ? n.right : n.left;
        // Push far first so the near side is explored first.
        if (far >= 0) stack.emplace_back(far, std::max(bound, diff * diff));
        if (near >= 0) stack.emplace_back(near, bound);
    }
    return {best, best_id};
}

std::optional<KdTree::Neighbor> KdTree::nearest(std::span<const double> q) const {
    if (q.size() != store_.dims()) throw ContractViolation("kd-tree query with the wrong dimension");
    if (nodes_.empty()) return std::nullopt;
    const auto [sq, id] = search(q);
    auto row = store_.at(id);
    return Neighbor{Point(std::vector<double>(row.begin(), row.end())), std::sqrt(sq)};
}

double KdTree::nearest_distance(std::span<const double> q) const {
    if (q.size() != store_.dims()) throw ContractViolation("kd-tree query with the wrong dimension");
    if (nodes_.empty()) return kInfinity;
    return std::sqrt(search(q).first);
}

std::vector<Point> KdTree::in_order() const {
    std::vector<Point> out;
    out.reserve(size());
    std::vector<std::int32_t> stack;
    std::int32_t cur = nodes_.empty() ? -1 : 0;
    while (cur >= 0 || !stack.empty()) {
        while (cur >= 0) {
            stack.push_back(cur);
            cur = nodes_[static_cast<std::size_t>(cur)].left;
        }
        cur = stack.back();
        stack.pop_back();
        auto row = store_.at(nodes_[static_cast<std::size_t>(cur)].point);
        out.emplace_back(std::vector<double>(row.begin(), row.end()));
        cur = nodes_[static_cast<std::size_t>(cur)].right;
    }
    return out;
}

std::size_t KdTree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 1}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, depth);
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.left >= 0) stack.emplace_back(n.left, depth + 1);
        if (n.right >= 0) stack.emplace_back(n.right, depth + 1);
    }
    return deepest;
}

}  // namespace lshart
