#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "lshart/domain.hpp"

namespace lshart {

/// Storage for executed test cases that answers (possibly approximate)
/// nearest-neighbor distance queries for the candidate-selection loop.
///
/// `nearest_distance` returns +infinity when the searched subset is empty.
/// Approximate indexes only ever search a subset of the executed points, so
/// their answer is never smaller than the exact nearest-neighbor distance.
class NeighborIndex {
public:
    virtual ~NeighborIndex() = default;

    virtual void insert(std::span<const double> p) = 0;
    virtual double nearest_distance(std::span<const double> q) const = 0;
    /// Called once before each generation round (forgetting draws its subset here).
    virtual void begin_round(SeededRng& /*rng*/) {}
    virtual std::size_t size() const noexcept = 0;
};

/// Flat row-major store of points with a fixed dimension.
class PointStore {
public:
    explicit PointStore(std::size_t dims) : dims_(dims) {}

    std::size_t dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return dims_ == 0 ? 0 : data_.size() / dims_; }
    void push_back(std::span<const double> p) { data_.insert(data_.end(), p.begin(), p.end()); }
    const double* row(std::size_t i) const noexcept { return data_.data() + i * dims_; }
    std::span<const double> at(std::size_t i) const noexcept { return {row(i), dims_}; }
    void pop_back() noexcept { data_.resize(data_.size() - dims_); }
    void clear() noexcept { data_.clear(); }

private:
    std::size_t dims_;
    std::vector<double> data_;
};

/// Exact nearest neighbor by scanning every executed point.
class LinearScanIndex final : public NeighborIndex {
public:
    explicit LinearScanIndex(std::size_t dims) : store_(dims) {}

    void insert(std::span<const double> p) override;
    double nearest_distance(std::span<const double> q) const override;
    std::size_t size() const noexcept override { return store_.size(); }

    const PointStore& store() const noexcept { return store_; }

private:
    PointStore store_;
};

enum class ForgettingKind { Random, Recent };

/// Forgetting: distance computations only against `lambda` executed points,
/// either a fresh random subset per round or the most recent suffix.
class ForgettingIndex final : public NeighborIndex {
public:
    ForgettingIndex(std::size_t dims, ForgettingKind kind, std::size_t lambda);

    void insert(std::span<const double> p) override;
    double nearest_distance(std::span<const double> q) const override;
    void begin_round(SeededRng& rng) override;
    std::size_t size() const noexcept override { return store_.size(); }

    const std::vector<std::size_t>& active() const noexcept { return active_; }

private:
    PointStore store_;
    ForgettingKind kind_;
    std::size_t lambda_;
    std::vector<std::size_t> active_;
};

/// `count` distinct indices drawn uniformly from [0, population), ascending.
std::vector<std::size_t> sample_distinct_indices(std::size_t population, std::size_t count, SeededRng& rng);

/// Random forgetting filter: all of `executed` when it fits in the budget,
/// otherwise a uniform random `lambda`-subset (execution order preserved).
template <typename T>
std::vector<T> rf_filter(std::span<const T> executed, std::size_t lambda, SeededRng& rng) {
    if (executed.size() <= lambda) return {executed.begin(), executed.end()};
    std::vector<T> out;
    out.reserve(lambda);
    for (std::size_t i : sample_distinct_indices(executed.size(), lambda, rng)) out.push_back(executed[i]);
    return out;
}

/// Consecutive retention filter: the most recent `lambda` executed points.
template <typename T>
std::vector<T> cr_filter(std::span<const T> executed, std::size_t lambda) {
    const std::size_t keep = std::min(lambda, executed.size());
    return {executed.end() - static_cast<std::ptrdiff_t>(keep), executed.end()};
}

}  // namespace lshart
