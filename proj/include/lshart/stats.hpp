#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lshart/domain.hpp"
#include "lshart/failure.hpp"

namespace lshart {

/// Outcome of one F-measure run.
struct RunOutcome {
    std::size_t f_measure = 1;   // tests executed up to and including the first failure
    double f_time_ms = 0.0;
    std::size_t relaxation_events = 0;
};

/// Detection flags of N_t fixed-size test sets.
struct PmeasureSample {
    std::vector<bool> detected;
    std::size_t n = 0;  // test-set size

    std::size_t n_t() const noexcept { return detected.size(); }
    std::size_t n_f() const noexcept;
};

/// 1 / theta.
double theoretical_rt_f(double theta);
/// F * theta.
double f_ratio(double f, double theta);
/// Fraction of test sets that detected a failure.
double p_measure(const PmeasureSample& sample);
double p_measure(std::size_t n_f, std::size_t n_t);
/// Number of failure-causing inputs in the test set.
std::size_t e_measure(std::span<const Point> tests, const FailurePattern& pattern);

/// round(log 0.5 / log(1 - theta)): the size at which RT detects with probability one half.
std::size_t test_set_size(double theta);
/// Standard deviation of RT's P-measure: sqrt((1-theta)^n - (1-theta)^2n).
double rt_p_sd(double theta, std::size_t n);
double standard_error(double sd, std::size_t n_t);

/// Mid-ranks (1-based) of the values; tied values share the mean rank.
std::vector<double> mid_ranks(std::span<const double> values);

/// Vargha-Delaney effect size: probability a draw from s1 exceeds one from s2,
/// ties counting half.
double a12(std::span<const double> s1, std::span<const double> s2);

/// Mann-Whitney U statistic of s1 (number of pairs where s1 wins, ties half).
double mann_whitney_statistic(std::span<const double> s1, std::span<const double> s2);
/// Two-tailed p by enumerating every split of the pooled mid-ranks.
double mann_whitney_exact(std::span<const double> s1, std::span<const double> s2);
/// Two-tailed p from the tie-corrected normal approximation with continuity correction.
double mann_whitney_normal(std::span<const double> s1, std::span<const double> s2);
/// Pooled size <= 12 uses the exact distribution, larger samples the approximation.
double mann_whitney_u(std::span<const double> s1, std::span<const double> s2);
inline constexpr std::size_t kExactUThreshold = 12;

/// Two-tailed Fisher exact test of [[a, b], [c, d]]: total probability of
/// tables with the same margins that are at most as probable as the observed one.
double fisher_exact(std::size_t a, std::size_t b, std::size_t c, std::size_t d);

/// Odds ratio of a1 vs a2 detections out of n, with continuity constant rho.
double odds_ratio(std::size_t a1, std::size_t a2, std::size_t n, double rho = 0.5);

enum class Verdict { Win, Tie, Loss };
std::string to_string(Verdict v);

struct Comparison {
    double p_value = 1.0;
    double effect = 0.5;
    Verdict verdict = Verdict::Tie;
};

inline constexpr double kSignificance = 0.01;

/// Candidate vs baseline F-measures (lower is better). The effect is
/// a12(baseline, candidate), so values above 0.5 favor the candidate.
Comparison compare_fmeasure(std::span<const double> candidate, std::span<const double> baseline);

/// Candidate vs baseline detections over n_t test sets each (higher is better).
/// The effect is the odds ratio; values above 1 favor the candidate.
Comparison compare_pmeasure(std::size_t candidate_detected, std::size_t baseline_detected, std::size_t n_t);

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

/// Mean, sample SD and normal-approximation 95% confidence interval.
Summary summarize(std::span<const double> values);

double median(std::vector<double> values);

}  // namespace lshart
