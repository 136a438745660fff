#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lshart/neighbor_index.hpp"

namespace lshart {

/// One member of the Gaussian (2-stable) E2LSH family:
/// h(v) = floor((a . v + b) / w), a ~ N(0, I), b ~ U[0, w).
struct HashFunction {
    std::vector<double> a;
    double b = 0.0;
    double w = 1.0;

    static HashFunction random(std::size_t dims, double w, SeededRng& rng);

    std::int64_t operator()(std::span<const double> v) const noexcept;
};

/// Floor (toward -infinity) of the affine projection.
std::int64_t hash_value(const HashFunction& h, std::span<const double> v);

/// Probability that two points at distance `alpha` share a bucket under one
/// random Gaussian hash of width `w`. Uses the density of |a . (q - v)|, so
/// the value tends to 1 as alpha -> 0.
double collision_probability(double w, double alpha);

/// Width whose collision probability at the domain diameter equals `p`.
double derive_initial_w(const InputDomain& domain, double p = 0.9);

/// Scalable LSH tree.
///
/// Ordinary buckets hold at most `capacity` point ids. When an insertion
/// would overflow one, it becomes a super bucket with a freshly drawn hash of
/// half its parent's width (the root super bucket uses the initial width) and
/// its points are re-hashed into ordinary children, recursively if a child
/// still overflows. Children are created lazily.
class SlshTree {
public:
    struct Node;

    struct OrdinaryBucket {
        std::vector<std::uint32_t> members;
    };

    struct SuperBucket {
        HashFunction hash;
        std::unordered_map<std::int64_t, std::unique_ptr<Node>> children;
    };

    struct Node {
        std::size_t depth = 0;
        std::variant<OrdinaryBucket, SuperBucket> content;

        bool is_super() const noexcept { return std::holds_alternative<SuperBucket>(content); }
        const OrdinaryBucket& ordinary() const { return std::get<OrdinaryBucket>(content); }
        const SuperBucket& super() const { return std::get<SuperBucket>(content); }
    };

    /// Draws the hash for a bucket promoted at `depth` with width `width`.
    using HashFactory = std::function<HashFunction(std::size_t depth, double width)>;

    struct Shape {
        std::size_t depth = 0;
        std::size_t ordinary_buckets = 0;
        std::size_t super_buckets = 0;
        /// occupancy_histogram[k] = number of ordinary buckets holding k points.
        std::vector<std::size_t> occupancy_histogram;
        /// ordinary_per_depth[k] = number of ordinary buckets at depth k.
        std::vector<std::size_t> ordinary_per_depth;
    };

    SlshTree(std::size_t dims, double initial_width, std::size_t capacity, std::uint64_t seed,
             std::size_t max_levels = 40);
    SlshTree(std::size_t dims, double initial_width, std::size_t capacity, HashFactory factory,
             std::size_t max_levels = 40);

    std::size_t dims() const noexcept { return store_.dims(); }
    std::size_t size() const noexcept { return store_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t max_levels() const noexcept { return max_levels_; }
    double initial_width() const noexcept { return initial_width_; }
    double width_at(std::size_t depth) const noexcept;
    const Node& root() const noexcept { return *root_; }

    /// Walks from the root to the ordinary bucket for `c`, creating absent children.
    const OrdinaryBucket& search_for_hash_bucket(std::span<const double> c);
    /// Same walk without creating anything; nullptr when the child is absent.
    const OrdinaryBucket* probe(std::span<const double> c) const;

    /// Exact nearest member of `bucket`; first inserted wins ties.
    std::optional<Point> identify_nn(const OrdinaryBucket& bucket, std::span<const double> c) const;
    /// Distance to the nearest member of the bucket `c` hashes to; +infinity when empty.
    double approximate_nn_distance(std::span<const double> c) const;

    void insert(std::span<const double> t);

    std::span<const double> point(std::uint32_t id) const noexcept { return store_.at(id); }
    /// Every point reachable from the root, gathered bucket by bucket.
    std::vector<Point> enumerate() const;
    Shape shape() const;
    nlohmann::json shape_json() const;

    /// Checks bucket capacity, width halving along every path, depth limit
    /// and that each id appears exactly once. Returns an empty string when
    /// the tree is consistent, otherwise a description of the first violation.
    std::string check_invariants() const;

private:
    Node& descend(std::span<const double> c);
    std::unique_ptr<Node> build_super(std::size_t depth, const std::vector<std::uint32_t>& ids);

    PointStore store_;
    double initial_width_;
    std::size_t capacity_;
    std::size_t max_levels_;
    HashFactory factory_;
    std::unique_ptr<Node> root_;
};

/// Adapter exposing an SLSH tree as the candidate-selection neighbor index.
class SlshIndex final : public NeighborIndex {
public:
    SlshIndex(const InputDomain& domain, std::size_t capacity, double collision_p, std::uint64_t seed,
              std::size_t max_levels = 40);

    void insert(std::span<const double> p) override { tree_.insert(p); }
    double nearest_distance(std::span<const double> q) const override { return tree_.approximate_nn_distance(q); }
    std::size_t size() const noexcept override { return tree_.size(); }

    const SlshTree& tree() const noexcept { return tree_; }

private:
    SlshTree tree_;
};

}  // namespace lshart
