#include "lshart/neighbor_index.hpp"

#include <cmath>

#include "lshart/error.hpp"

namespace lshart {

void LinearScanIndex::insert(std::span<const double> p) {
    if (p.size() != store_.dims()) throw ContractViolation("inserted point has the wrong dimension");
    store_.push_back(p);
}

double LinearScanIndex::nearest_distance(std::span<const double> q) const {
    const std::size_t n = store_.size();
    if (n == 0) return kInfinity;
    const std::size_t d = store_.dims();
    double best = kInfinity;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = squared_distance_unchecked(store_.row(i), q.data(), d);
        if (s < best) best = s;
    }
    return std::sqrt(best);
}

ForgettingIndex::ForgettingIndex(std::size_t dims, ForgettingKind kind, std::size_t lambda)
    : store_(dims), kind_(kind), lambda_(lambda) {
    if (lambda == 0) throw ParameterError("forgetting budget lambda must be at least 1");
}

void ForgettingIndex::insert(std::span<const double> p) {
    if (p.size() != store_.dims()) throw ContractViolation("inserted point has the wrong dimension");
    store_.push_back(p);
}

void ForgettingIndex::begin_round(SeededRng& rng) {
    const std::size_t n = store_.size();
    active_.clear();
    if (n <= lambda_) {
        for (std::size_t i = 0; i < n; ++i) active_.push_back(i);
        return;
    }
    if (kind_ == ForgettingKind::Random) {
        active_ = sample_distinct_indices(n, lambda_, rng);
    } else {
        for (std::size_t i = n - lambda_; i < n; ++i) active_.push_back(i);
    }
}

double ForgettingIndex::nearest_distance(std::span<const double> q) const {
    const std::size_t d = store_.dims();
    double best = kInfinity;
    for (std::size_t i : active_) {
        const double s = squared_distance_unchecked(store_.row(i), q.data(), d);
        if (s < best) best = s;
    }
    return std::sqrt(best);
}

std::vector<std::size_t> sample_distinct_indices(std::size_t population, std::size_t count, SeededRng& rng) {
    if (count > population) throw ContractViolation("cannot sample more indices than the population");
    // Floyd's algorithm: O(count) draws, no population-sized scratch.
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    for (std::size_t j = population - count; j < population; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
            chosen.push_back(t);
        } else {
            chosen.push_back(j);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace lshart
