#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lshart/constrained.hpp"
#include "lshart/failure.hpp"
#include "lshart/stats.hpp"
#include "lshart/strategy.hpp"

namespace lshart {

enum class ExperimentKind { Fmeasure, Pmeasure, Timing, Configurable };
std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Fmeasure;
    /// The first entry is the baseline every other strategy is compared against.
    std::vector<std::string> strategies{"rt"};
    PatternKind pattern = PatternKind::Block;
    std::vector<std::size_t> dims{2};
    double theta = 0.005;
    std::size_t runs = 1000;
    std::size_t n_t = 100;
    /// Test-set size for P-measure; 0 derives it from theta.
    std::size_t set_size = 0;
    std::vector<std::size_t> n_list{500, 1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500, 5000};
    std::size_t timing_repetitions = 3;
    /// F-measure runs stop here and are reported as censored; 0 means ceil(1000 / theta).
    std::size_t max_tests = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    /// Leaves out wall-clock metrics so repeated runs write identical bytes.
    bool deterministic = false;
    std::string out;

    std::string corpus;  // configurable: corpus JSON path
    std::size_t budget = 10000;
    StrategyParams params;

    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
};

/// One aggregated statistic.
struct MetricRow {
    std::string strategy;
    std::string scenario;
    std::string metric;
    Summary summary;
};

/// One per-run observation.
struct RawRow {
    std::string strategy;
    std::string scenario;
    std::size_t run = 0;
    std::string metric;
    double value = 0.0;
};

struct VerdictRow {
    std::string candidate;
    std::string baseline;
    std::string scenario;
    std::string metric;
    std::string test;  // "mann-whitney" or "fisher"
    double p_value = 1.0;
    double effect = 0.5;
    Verdict verdict = Verdict::Tie;
};

class MetricTable {
public:
    /// Adds a row; a repeated (strategy, scenario, metric) key is a contract violation.
    void add(MetricRow row);
    void add(const std::string& strategy, const std::string& scenario, const std::string& metric,
             std::span<const double> values);
    void add_value(const std::string& strategy, const std::string& scenario, const std::string& metric, double value);

    const std::vector<MetricRow>& rows() const noexcept { return rows_; }
    const MetricRow* find(const std::string& strategy, const std::string& scenario, const std::string& metric) const;

    std::string to_csv() const;

private:
    std::vector<MetricRow> rows_;
};

struct ExperimentResult {
    MetricTable table;
    std::vector<RawRow> raw;
    std::vector<VerdictRow> verdicts;
    std::vector<std::string> svgs;  // one per dimension for timing experiments

    const MetricRow* find(const std::string& strategy, const std::string& scenario, const std::string& metric) const {
        return table.find(strategy, scenario, metric);
    }
};

std::string raw_to_csv(std::span<const RawRow> rows);
std::vector<RawRow> raw_from_csv(const std::string& text);
std::string verdicts_to_csv(std::span<const VerdictRow> rows);

/// Writes <prefix>.csv, <prefix>.raw.csv, <prefix>.verdicts.csv and any SVGs
/// (<prefix>.d<dim>.svg). A trailing ".csv" on `prefix` is dropped.
void write_outputs(const ExperimentResult& result, const std::string& prefix, std::span<const std::size_t> dims = {});

/// "block-d2-t0.005" style scenario label.
std::string scenario_label(PatternKind pattern, std::size_t dims, double theta);

/// Stable 64-bit tag of a strategy name for seed derivation.
std::uint64_t name_tag(const std::string& name) noexcept;

ExperimentResult run_fmeasure(const ExperimentConfig& config);
ExperimentResult run_pmeasure(const ExperimentConfig& config);
ExperimentResult run_timing(const ExperimentConfig& config);
/// Loads `config.corpus`; see the overload for an in-memory corpus.
ExperimentResult run_configurable(const ExperimentConfig& config);
ExperimentResult run_configurable(const ExperimentConfig& config, const Corpus& corpus);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Verdicts of strategy `candidate` against `baseline` for every scenario in
/// which `rows` holds `metric` values for both. "detected_sets" uses Fisher's
/// test with `sets_per_run` sets per run; other metrics use the U test and A12
/// with lower values counting as better.
std::vector<VerdictRow> compare(std::span<const RawRow> rows, const std::string& candidate, const std::string& baseline,
                                const std::string& metric = "f_measure", std::size_t sets_per_run = 100);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

/// Ordinary least squares; constant ys give R^2 = 1. Fewer than two distinct xs throws FitError.
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

struct SvgSeries {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
    std::optional<LinearFit> fit;
};

/// Self-contained static line chart with axes, markers and fitted lines.
std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> series);

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception by index is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace lshart
