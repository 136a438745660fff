#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lshart/domain.hpp"
#include "lshart/neighbor_index.hpp"

namespace lshart {

struct StrategyParams {
    std::size_t k = 10;                  // FSCS candidate count
    double exclusion_ratio = 0.75;       // RRT R
    std::size_t lambda = 60;             // forgetting budget
    std::size_t p0 = 3;                  // DF initial partitions per axis
    std::size_t tau = 5;                 // DF mean cell occupancy threshold
    std::size_t bucket_capacity = 60;    // SLSH m
    double collision_p = 0.9;            // SLSH target collision probability at the diameter
    std::size_t max_levels = 40;         // SLSH depth limit
    std::size_t max_rrt_attempts = 100000;

    void validate() const;
};

enum class SelectionMode { Random, Fscs, Rrt };

/// Counters gathered while generating; timings only when enabled.
struct GenerationStats {
    std::size_t relaxations = 0;       // RRT rounds that hit max_rrt_attempts
    std::size_t candidates = 0;        // valid candidates drawn
    std::size_t invalid_draws = 0;     // draws rejected by the candidate filter
    double generation_seconds = 0.0;   // drawing (and validity-checking) candidates
    double selection_seconds = 0.0;    // neighbor search, selection and insertion
};

/// Index of the largest distance, lowest index on ties.
std::size_t fscs_select(std::span<const double> min_dists);

/// Exclusion-radius coefficient: 1/2, 1, then sigma_{d-2} * d / 2.
double sigma_d(std::size_t d);

/// RRT exclusion radius for `count` executed tests in a domain of size `area`.
double rrt_radius(std::size_t d, double area, double ratio, std::size_t count);

/// A test-case generator: RT, or FSCS/RRT over some neighbor index.
///
/// The first test is always uniform random. After that, FSCS draws `k`
/// candidates and keeps the one farthest from its nearest executed test;
/// RRT draws candidates one at a time until one lies outside the exclusion
/// radius. Every executed test is recorded and inserted into the index.
class Strategy {
public:
    using CandidateFilter = std::function<bool(std::span<const double>)>;

    Strategy(std::string name, SelectionMode mode, InputDomain domain, StrategyParams params,
             std::unique_ptr<NeighborIndex> index, std::uint64_t seed);

    Strategy(Strategy&&) noexcept = default;
    Strategy& operator=(Strategy&&) noexcept = default;

    /// Generates, records and returns the next test case.
    const Point& next();

    const std::string& name() const noexcept { return name_; }
    SelectionMode mode() const noexcept { return mode_; }
    const InputDomain& domain() const noexcept { return domain_; }
    const StrategyParams& params() const noexcept { return params_; }
    const std::vector<Point>& executed() const noexcept { return executed_; }
    const NeighborIndex* index() const noexcept { return index_.get(); }
    const GenerationStats& stats() const noexcept { return stats_; }

    /// Only candidates accepted by `filter` are considered; rejected draws are
    /// counted. More than `max_consecutive_rejections` in a row throws SaturationError.
    void set_candidate_filter(CandidateFilter filter, std::size_t max_consecutive_rejections = 1000000);
    void enable_timing(bool on) noexcept { timing_ = on; }

private:
    void draw_candidate(std::vector<double>& out);
    void commit(std::vector<double>& chosen);
    void next_random();
    void next_fscs();
    void next_rrt();

    std::string name_;
    SelectionMode mode_;
    InputDomain domain_;
    StrategyParams params_;
    std::unique_ptr<NeighborIndex> index_;
    SeededRng rng_;
    std::vector<Point> executed_;
    GenerationStats stats_;
    CandidateFilter filter_;
    std::size_t max_rejections_ = 1000000;
    bool timing_ = false;

    std::vector<std::vector<double>> candidates_;
    std::vector<double> dists_;
};

/// Names accepted by `make_strategy`.
const std::vector<std::string>& strategy_names();
bool is_strategy_name(const std::string& name);

/// Builds a strategy by name: rt, fscs, rrt, rf-fscs, cr-fscs, rf-rrt, cr-rrt,
/// df-fscs, df-rrt, kd-fscs, kd-rrt, lsh-fscs, lsh-rrt.
Strategy make_strategy(const std::string& name, const InputDomain& domain, const StrategyParams& params,
                       std::uint64_t seed);

/// The neighbor backend a named strategy uses (nullptr for rt).
std::unique_ptr<NeighborIndex> make_index(const std::string& name, const InputDomain& domain,
                                          const StrategyParams& params, std::uint64_t seed);

}  // namespace lshart
