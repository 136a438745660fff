#include "lshart/strategy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "lshart/error.hpp"
#include "lshart/grid_index.hpp"
#include "lshart/kd_tree.hpp"
#include "lshart/slsh.hpp"

namespace lshart {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double log_sigma_d(std::size_t d) {
    double acc = d % 2 == 0 ? 0.0 : std::log(0.5);  // sigma_2 = 1, sigma_1 = 1/2
    for (std::size_t j = d % 2 == 0 ? 4 : 3; j <= d; j += 2) acc += std::log(static_cast<double>(j) / 2.0);
    return acc;
}

}  // namespace

void StrategyParams::validate() const {
    if (k < 1) throw ParameterError("candidate count k must be at least 1");
    if (!(exclusion_ratio > 0.0 && exclusion_ratio < 1.0)) throw ParameterError("exclusion ratio R must lie in (0, 1)");
    if (lambda < 1) throw ParameterError("forgetting budget lambda must be at least 1");
    if (p0 < 1) throw ParameterError("initial partitions p0 must be at least 1");
    if (tau < 1) throw ParameterError("density threshold tau must be at least 1");
    if (bucket_capacity < 1) throw ParameterError("bucket capacity m must be at least 1");
    if (!(collision_p > 0.0 && collision_p < 1.0)) throw ParameterError("collision probability must lie in (0, 1)");
    if (max_levels < 1) throw ParameterError("max_levels must be at least 1");
    if (max_rrt_attempts < 1) throw ParameterError("max_rrt_attempts must be at least 1");
}

std::size_t fscs_select(std::span<const double> min_dists) {
    if (min_dists.empty()) throw ContractViolation("fscs_select needs at least one candidate");
    std::size_t best = 0;
    for (std::size_t i = 1; i < min_dists.size(); ++i) {
        if (min_dists[i] > min_dists[best]) best = i;
    }
    return best;
}

double sigma_d(std::size_t d) {
    if (d < 1) throw ParameterError("sigma_d needs d >= 1");
    return std::exp(log_sigma_d(d));
}

double rrt_radius(std::size_t d, double area, double ratio, std::size_t count) {
    if (d < 1) throw ParameterError("rrt_radius needs d >= 1");
    if (count < 1) throw ParameterError("rrt_radius needs at least one executed test");
    if (!(area > 0.0)) throw ParameterError("domain size must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("exclusion ratio must lie in (0, 1)");
    // Evaluated in log space: sigma_d overflows a double past d ~ 340.
    const double log_num = log_sigma_d(d) + std::log(area) + std::log(ratio);
    const double log_den = static_cast<double>(d / 2) * std::log(std::numbers::pi) + std::log(static_cast<double>(count));
    return std::exp((log_num - log_den) / static_cast<double>(d));
}

Strategy::Strategy(std::string name, SelectionMode mode, InputDomain domain, StrategyParams params,
                   std::unique_ptr<NeighborIndex> index, std::uint64_t seed)
    : name_(std::move(name)),
      mode_(mode),
      domain_(std::move(domain)),
      params_(params),
      index_(std::move(index)),
      rng_(seed) {
    params_.validate();
    if (mode_ != SelectionMode::Random && !index_) throw ContractViolation("FSCS/RRT strategies need a neighbor index");
}

void Strategy::set_candidate_filter(CandidateFilter filter, std::size_t max_consecutive_rejections) {
    filter_ = std::move(filter);
    max_rejections_ = max_consecutive_rejections;
}

void Strategy::draw_candidate(std::vector<double>& out) {
    const auto start = timing_ ? Clock::now() : Clock::time_point{};
    std::size_t rejected = 0;
    while (true) {
        sample_uniform_into(domain_, rng_, out);
        if (!filter_ || filter_(out)) break;
        ++stats_.invalid_draws;
        if (++rejected >= max_rejections_) {
            throw SaturationError("candidate filter rejected " + std::to_string(rejected) + " consecutive draws");
        }
    }
    ++stats_.candidates;
    if (timing_) stats_.generation_seconds += seconds_since(start);
}

void Strategy::commit(std::vector<double>& chosen) {
    if (index_) index_->insert(chosen);
    executed_.emplace_back(std::move(chosen));
}

const Point& Strategy::next() {
    if (executed_.empty() || mode_ == SelectionMode::Random) {
        next_random();
    } else if (mode_ == SelectionMode::Fscs) {
        next_fscs();
    } else {
        next_rrt();
    }
    return executed_.back();
}

void Strategy::next_random() {
    std::vector<double> c;
    draw_candidate(c);
    const auto start = timing_ ? Clock::now() : Clock::time_point{};
    commit(c);
    if (timing_) stats_.selection_seconds += seconds_since(start);
}

void Strategy::next_fscs() {
    const std::size_t k = params_.k;
    candidates_.resize(k);
    dists_.resize(k);
    index_->begin_round(rng_);
    for (std::size_t i = 0; i < k; ++i) draw_candidate(candidates_[i]);

    const auto start = timing_ ? Clock::now() : Clock::time_point{};
    for (std::size_t i = 0; i < k; ++i) dists_[i] = index_->nearest_distance(candidates_[i]);
    const std::size_t pick = fscs_select(dists_);
    std::vector<double> chosen = candidates_[pick];
    commit(chosen);
    if (timing_) stats_.selection_seconds += seconds_since(start);
}

void Strategy::next_rrt() {
    const double radius = rrt_radius(domain_.dims(), domain_.volume(), params_.exclusion_ratio, executed_.size());
    index_->begin_round(rng_);
    std::vector<double> candidate;
    std::vector<double> best;
    double best_dist = -1.0;
    for (std::size_t attempt = 0; attempt < params_.max_rrt_attempts; ++attempt) {
        draw_candidate(candidate);
        const auto start = timing_ ? Clock::now() : Clock::time_point{};
        const double dist = index_->nearest_distance(candidate);
        if (dist > radius) {
            commit(candidate);
            if (timing_) stats_.selection_seconds += seconds_since(start);
            return;
        }
        if (dist > best_dist) {
            best_dist = dist;
            best = candidate;
        }
        if (timing_) stats_.selection_seconds += seconds_since(start);
    }
    ++stats_.relaxations;
    commit(best);
}

const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names{"rt",     "fscs",    "rrt",     "rf-fscs",  "cr-fscs",
                                                "rf-rrt", "cr-rrt",  "df-fscs", "df-rrt",   "kd-fscs",
                                                "kd-rrt", "lsh-fscs", "lsh-rrt"};
    return names;
}

bool is_strategy_name(const std::string& name) {
    const auto& names = strategy_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::unique_ptr<NeighborIndex> make_index(const std::string& name, const InputDomain& domain,
                                          const StrategyParams& params, std::uint64_t seed) {
    if (!is_strategy_name(name)) throw ParameterError("unknown strategy '" + name + "'");
    const std::size_t d = domain.dims();
    if (name == "rt") return nullptr;
    if (name == "fscs" || name == "rrt") return std::make_unique<LinearScanIndex>(d);
    if (name.starts_with("rf-")) return std::make_unique<ForgettingIndex>(d, ForgettingKind::Random, params.lambda);
    if (name.starts_with("cr-")) return std::make_unique<ForgettingIndex>(d, ForgettingKind::Recent, params.lambda);
    if (name.starts_with("df-")) {
        if (domain.is_binary()) throw ParameterError("distance-aware forgetting does not apply to binary domains");
        return std::make_unique<GridIndex>(domain, params.p0, params.tau);
    }
    if (name.starts_with("kd-")) return std::make_unique<KdTreeIndex>(d);
    return std::make_unique<SlshIndex>(domain, params.bucket_capacity, params.collision_p, derive_seed(seed, 0x5154),
                                       params.max_levels);
}

Strategy make_strategy(const std::string& name, const InputDomain& domain, const StrategyParams& params,
                       std::uint64_t seed) {
    params.validate();
    SelectionMode mode = SelectionMode::Random;
    if (name != "rt") mode = name.ends_with("rrt") ? SelectionMode::Rrt : SelectionMode::Fscs;
    return Strategy(name, mode, domain, params, make_index(name, domain, params, seed), seed);
}

}  // namespace lshart
