#include "lshart/slsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "lshart/error.hpp"

namespace lshart {

HashFunction HashFunction::random(std::size_t dims, double w, SeededRng& rng) {
    if (!(w > 0.0)) throw ParameterError("quantization width must be positive");
    HashFunction h;
    h.a.resize(dims);
    for (auto& x : h.a) x = rng.gaussian();
    h.b = rng.uniform(0.0, w);
    h.w = w;
    return h;
}

std::int64_t HashFunction::operator()(std::span<const double> v) const noexcept {
    double dot = b;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * v[i];
    return static_cast<std::int64_t>(std::floor(dot / w));
}

std::int64_t hash_value(const HashFunction& h, std::span<const double> v) {
    if (v.size() != h.a.size()) throw ContractViolation("hashed vector has the wrong dimension");
    return h(v);
}

double collision_probability(double w, double alpha) {
    if (!(w > 0.0) || !(alpha > 0.0)) throw ParameterError("collision probability needs w > 0 and alpha > 0");
    const double r = w / alpha;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    // 2*Phi(r) - 1 == erf(r / sqrt(2))
    const double mass = std::erf(r / std::numbers::sqrt2);
    const double tail = (2.0 * inv_sqrt_2pi / r) * (-std::expm1(-0.5 * r * r));
    return std::clamp(mass - tail, 0.0, 1.0);
}

double derive_initial_w(const InputDomain& domain, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("target collision probability must lie in (0, 1)");
    const double diam = domain_diameter(domain);
    double lo = 1e-6 * diam;
    double hi = 1e6 * diam;
    // collision_probability increases with w for a fixed distance.
    if (collision_probability(lo, diam) > p || collision_probability(hi, diam) < p) {
        throw DerivationError("no quantization width in [1e-6, 1e6] x diameter reaches the target probability");
    }
    while ((hi - lo) > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (collision_probability(mid, diam) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SlshTree::SlshTree(std::size_t dims, double initial_width, std::size_t capacity, std::uint64_t seed,
                   std::size_t max_levels)
    : SlshTree(dims, initial_width, capacity,
               [rng = std::make_shared<SeededRng>(seed), dims](std::size_t, double width) {
                   return HashFunction::random(dims, width, *rng);
               },
               max_levels) {}

SlshTree::SlshTree(std::size_t dims, double initial_width, std::size_t capacity, HashFactory factory,
                   std::size_t max_levels)
    : store_(dims),
      initial_width_(initial_width),
      capacity_(capacity),
      max_levels_(max_levels),
      factory_(std::move(factory)),
      root_(std::make_unique<Node>()) {
    if (dims == 0) throw ParameterError("tree dimension must be positive");
    if (!(initial_width > 0.0)) throw ParameterError("initial width must be positive");
    if (capacity == 0) throw ParameterError("bucket capacity m must be at least 1");
}

double SlshTree::width_at(std::size_t depth) const noexcept {
    return std::ldexp(initial_width_, -static_cast<int>(depth));
}

SlshTree::Node& SlshTree::descend(std::span<const double> c) {
    Node* node = root_.get();
    while (auto* sup = std::get_if<SuperBucket>(&node->content)) {
        auto& child = sup->children[sup->hash(c)];
        if (!child) {
            child = std::make_unique<Node>();
            child->depth = node->depth + 1;
        }
        node = child.get();
    }
    return *node;
}

const SlshTree::OrdinaryBucket& SlshTree::search_for_hash_bucket(std::span<const double> c) {
    if (c.size() != dims()) throw ContractViolation("searched point has the wrong dimension");
    return std::get<OrdinaryBucket>(descend(c).content);
}

const SlshTree::OrdinaryBucket* SlshTree::probe(std::span<const double> c) const {
    const Node* node = root_.get();
    while (const auto* sup = std::get_if<SuperBucket>(&node->content)) {
        auto it = sup->children.find(sup->hash(c));
        if (it == sup->children.end()) return nullptr;
        node = it->second.get();
    }
    return &std::get<OrdinaryBucket>(node->content);
}

std::optional<Point> SlshTree::identify_nn(const OrdinaryBucket& bucket, std::span<const double> c) const {
    if (c.size() != dims()) throw ContractViolation("query point has the wrong dimension");
    double best = kInfinity;
    std::optional<std::uint32_t> best_id;
    for (std::uint32_t id : bucket.members) {
        const double s = squared_distance_unchecked(store_.row(id), c.data(), dims());
        if (s < best) {
            best = s;
            best_id = id;
        }
    }
    if (!best_id) return std::nullopt;
    auto row = store_.at(*best_id);
    return Point(std::vector<double>(row.begin(), row.end()));
}

double SlshTree::approximate_nn_distance(std::span<const double> c) const {
    const OrdinaryBucket* bucket = probe(c);
    if (bucket == nullptr) return kInfinity;
    const std::size_t d = dims();
    double best = kInfinity;
    for (std::uint32_t id : bucket->members) {
        const double s = squared_distance_unchecked(store_.row(id), c.data(), d);
        if (s < best) best = s;
    }
    return std::sqrt(best);
}

std::unique_ptr<SlshTree::Node> SlshTree::build_super(std::size_t depth, const std::vector<std::uint32_t>& ids) {
    if (depth >= max_levels_) {
        throw IndexDegeneracyError("hash tree exceeded " + std::to_string(max_levels_) +
                                   " levels; too many (near-)duplicate points for bucket capacity " +
                                   std::to_string(capacity_));
    }
    auto node = std::make_unique<Node>();
    node->depth = depth;
    SuperBucket sup{factory_(depth, width_at(depth)), {}};
    for (std::uint32_t id : ids) {
        auto& child = sup.children[sup.hash(store_.at(id))];
        if (!child) {
            child = std::make_unique<Node>();
            child->depth = depth + 1;
        }
        std::get<OrdinaryBucket>(child->content).members.push_back(id);
    }
    for (auto& [key, child] : sup.children) {
        const auto& members = std::get<OrdinaryBucket>(child->content).members;
        if (members.size() > capacity_) child = build_super(depth + 1, members);
    }
    node->content = std::move(sup);
    return node;
}

void SlshTree::insert(std::span<const double> t) {
    if (t.size() != dims()) throw ContractViolation("inserted point has the wrong dimension");
    Node& node = descend(t);
    auto& bucket = std::get<OrdinaryBucket>(node.content);
    const auto id = static_cast<std::uint32_t>(store_.size());
    store_.push_back(t);
    if (bucket.members.size() < capacity_) {
        bucket.members.push_back(id);
        return;
    }
    std::vector<std::uint32_t> ids = bucket.members;
    ids.push_back(id);
    try {
        auto promoted = build_super(node.depth, ids);
        node.content = std::move(promoted->content);
    } catch (...) {
        // Leave the tree as it was before the failed insertion.
        store_.pop_back();
        throw;
    }
}

std::vector<Point> SlshTree::enumerate() const {
    std::vector<Point> out;
    out.reserve(size());
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (const auto* sup = std::get_if<SuperBucket>(&n->content)) {
            for (const auto& [key, child] : sup->children) stack.push_back(child.get());
        } else {
            for (std::uint32_t id : std::get<OrdinaryBucket>(n->content).members) {
                auto row = store_.at(id);
                out.emplace_back(std::vector<double>(row.begin(), row.end()));
            }
        }
    }
    return out;
}

SlshTree::Shape SlshTree::shape() const {
    Shape s;
    s.occupancy_histogram.assign(capacity_ + 1, 0);
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        s.depth = std::max(s.depth, n->depth);
        if (const auto* sup = std::get_if<SuperBucket>(&n->content)) {
            ++s.super_buckets;
            for (const auto& [key, child] : sup->children) stack.push_back(child.get());
        } else {
            ++s.ordinary_buckets;
            const std::size_t occ = std::get<OrdinaryBucket>(n->content).members.size();
            if (occ >= s.occupancy_histogram.size()) s.occupancy_histogram.resize(occ + 1, 0);
            ++s.occupancy_histogram[occ];
            if (n->depth >= s.ordinary_per_depth.size()) s.ordinary_per_depth.resize(n->depth + 1, 0);
            ++s.ordinary_per_depth[n->depth];
        }
    }
    return s;
}

nlohmann::json SlshTree::shape_json() const {
    const Shape s = shape();
    return {{"dims", dims()},
            {"size", size()},
            {"capacity", capacity_},
            {"initial_width", initial_width_},
            {"depth", s.depth},
            {"ordinary_buckets", s.ordinary_buckets},
            {"super_buckets", s.super_buckets},
            {"occupancy_histogram", s.occupancy_histogram},
            {"ordinary_per_depth", s.ordinary_per_depth}};
}

std::string SlshTree::check_invariants() const {
    std::vector<std::size_t> seen(size(), 0);
    struct Frame {
        const Node* node;
        double parent_width;  // 0 for the root
    };
    std::vector<Frame> stack{{root_.get(), 0.0}};
    while (!stack.empty()) {
        auto [n, parent_width] = stack.back();
        stack.pop_back();
        if (n->depth > max_levels_) return "bucket deeper than max_levels";
        if (const auto* sup = std::get_if<SuperBucket>(&n->content)) {
            const double w = sup->hash.w;
            if (parent_width == 0.0 && w != initial_width_) return "root super bucket does not use the initial width";
            if (parent_width != 0.0 && w != 0.5 * parent_width) return "super bucket width is not half its parent's";
            for (const auto& [key, child] : sup->children) {
                if (child->depth != n->depth + 1) return "child depth is not parent depth + 1";
                stack.push_back({child.get(), w});
            }
        } else {
            const auto& members = std::get<OrdinaryBucket>(n->content).members;
            if (members.size() > capacity_) return "ordinary bucket exceeds capacity";
            for (std::uint32_t id : members) {
                if (id >= seen.size()) return "bucket references an unknown point";
                if (++seen[id] != 1) return "point stored in more than one bucket";
            }
        }
    }
    for (std::size_t c : seen) {
        if (c != 1) return "point missing from every bucket";
    }
    return {};
}

SlshIndex::SlshIndex(const InputDomain& domain, std::size_t capacity, double collision_p, std::uint64_t seed,
                     std::size_t max_levels)
    : tree_(domain.dims(), derive_initial_w(domain, collision_p), capacity, seed, max_levels) {}

}  // namespace lshart
