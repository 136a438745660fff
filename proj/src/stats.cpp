#include "lshart/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "lshart/error.hpp"

namespace lshart {

namespace {

void require_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("failure rate must lie in (0, 1)");
}

void require_nonempty(std::span<const double> s1, std::span<const double> s2) {
    if (s1.empty() || s2.empty()) throw ParameterError("both samples must be nonempty");
}

std::vector<double> pooled(std::span<const double> s1, std::span<const double> s2) {
    std::vector<double> all(s1.begin(), s1.end());
    all.insert(all.end(), s2.begin(), s2.end());
    return all;
}

double log_choose(std::size_t n, std::size_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

std::size_t PmeasureSample::n_f() const noexcept {
    return static_cast<std::size_t>(std::count(detected.begin(), detected.end(), true));
}

double theoretical_rt_f(double theta) {
    require_theta(theta);
    return 1.0 / theta;
}

double f_ratio(double f, double theta) {
    require_theta(theta);
    if (!(f > 0.0)) throw ParameterError("F-measure must be positive");
    return f * theta;
}

double p_measure(std::size_t n_f, std::size_t n_t) {
    if (n_t < 1) throw ParameterError("P-measure needs at least one test set");
    if (n_f > n_t) throw ParameterError("more detecting sets than test sets");
    return static_cast<double>(n_f) / static_cast<double>(n_t);
}

double p_measure(const PmeasureSample& sample) { return p_measure(sample.n_f(), sample.n_t()); }

std::size_t e_measure(std::span<const Point> tests, const FailurePattern& pattern) {
    std::size_t hits = 0;
    for (const Point& t : tests) hits += pattern.is_failure(t) ? 1 : 0;
    return hits;
}

std::size_t test_set_size(double theta) {
    require_theta(theta);
    return static_cast<std::size_t>(std::llround(std::log(0.5) / std::log1p(-theta)));
}

double rt_p_sd(double theta, std::size_t n) {
    require_theta(theta);
    if (n < 1) throw ParameterError("test-set size must be at least 1");
    const double q = std::exp(static_cast<double>(n) * std::log1p(-theta));
    return std::sqrt(std::max(0.0, q - q * q));
}

double standard_error(double sd, std::size_t n_t) {
    if (n_t < 1) throw ParameterError("standard error needs N_t >= 1");
    if (sd < 0.0) throw ParameterError("standard deviation must be nonnegative");
    return sd / std::sqrt(static_cast<double>(n_t));
}

std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double a12(std::span<const double> s1, std::span<const double> s2) {
    require_nonempty(s1, s2);
    const auto ranks = mid_ranks(pooled(s1, s2));
    const double x = static_cast<double>(s1.size());
    const double y = static_cast<double>(s2.size());
    const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(s1.size()), 0.0);
    return (r1 / x - (x + 1.0) / 2.0) / y;
}

double mann_whitney_statistic(std::span<const double> s1, std::span<const double> s2) {
    require_nonempty(s1, s2);
    const auto ranks = mid_ranks(pooled(s1, s2));
    const double n1 = static_cast<double>(s1.size());
    const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(s1.size()), 0.0);
    return r1 - n1 * (n1 + 1.0) / 2.0;
}

double mann_whitney_exact(std::span<const double> s1, std::span<const double> s2) {
    require_nonempty(s1, s2);
    const std::size_t n1 = s1.size();
    const std::size_t total = n1 + s2.size();
    constexpr std::size_t kMaxExact = 26;
    if (total > kMaxExact) throw ParameterError("exact U enumeration supports pooled sizes up to 26");
    const auto ranks = mid_ranks(pooled(s1, s2));
    const double offset = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
    const double mean = static_cast<double>(n1) * static_cast<double>(s2.size()) / 2.0;
    double observed = 0.0;
    for (std::size_t i = 0; i < n1; ++i) observed += ranks[i];
    const double obs_dev = std::abs(observed - offset - mean);

    // Every n1-subset of the pooled positions, via Gosper's hack.
    std::uint64_t extreme = 0;
    std::uint64_t count = 0;
    const std::uint64_t limit = std::uint64_t{1} << total;
    for (std::uint64_t mask = (std::uint64_t{1} << n1) - 1; mask < limit;) {
        double r = 0.0;
        for (std::uint64_t m = mask; m != 0; m &= m - 1) r += ranks[static_cast<std::size_t>(std::countr_zero(m))];
        if (std::abs(r - offset - mean) >= obs_dev - 1e-9) ++extreme;
        ++count;
        const std::uint64_t low = mask & (~mask + 1);
        const std::uint64_t ripple = mask + low;
        mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
    return static_cast<double>(extreme) / static_cast<double>(count);
}

double mann_whitney_normal(std::span<const double> s1, std::span<const double> s2) {
    require_nonempty(s1, s2);
    const auto all = pooled(s1, s2);
    const double n1 = static_cast<double>(s1.size());
    const double n2 = static_cast<double>(s2.size());
    const double n = n1 + n2;
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) return 1.0;
    const double u = mann_whitney_statistic(s1, s2);
    const double dev = std::max(0.0, std::abs(u - n1 * n2 / 2.0) - 0.5);
    return std::min(1.0, std::erfc(dev / std::sqrt(var) / std::numbers::sqrt2));
}

double mann_whitney_u(std::span<const double> s1, std::span<const double> s2) {
    require_nonempty(s1, s2);
    if (s1.size() + s2.size() <= kExactUThreshold) return mann_whitney_exact(s1, s2);
    return mann_whitney_normal(s1, s2);
}

double fisher_exact(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const std::size_t r1 = a + b;
    const std::size_t r2 = c + d;
    const std::size_t c1 = a + c;
    const std::size_t n = r1 + r2;
    if (n == 0) return 1.0;
    const double log_denom = log_choose(n, c1);
    auto log_p = [&](std::size_t x) { return log_choose(r1, x) + log_choose(r2, c1 - x) - log_denom; };
    const std::size_t lo = c1 > r2 ? c1 - r2 : 0;
    const std::size_t hi = std::min(r1, c1);
    const double observed = log_p(a);
    double p = 0.0;
    for (std::size_t x = lo; x <= hi; ++x) {
        const double lp = log_p(x);
        // Relative slack so tables tied with the observed one are not lost to rounding.
        if (lp <= observed + 1e-7) p += std::exp(lp);
    }
    return std::clamp(p, 0.0, 1.0);
}

double odds_ratio(std::size_t a1, std::size_t a2, std::size_t n, double rho) {
    if (a1 > n || a2 > n) throw ParameterError("detections cannot exceed the number of test sets");
    if (!(rho > 0.0)) throw ParameterError("continuity constant rho must be positive");
    const double x1 = static_cast<double>(a1);
    const double x2 = static_cast<double>(a2);
    const double nn = static_cast<double>(n);
    return ((x1 + rho) / (nn + rho - x1)) / ((x2 + rho) / (nn + rho - x2));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Win: return "win";
        case Verdict::Loss: return "loss";
        case Verdict::Tie: break;
    }
    return "tie";
}

Comparison compare_fmeasure(std::span<const double> candidate, std::span<const double> baseline) {
    Comparison c;
    c.p_value = mann_whitney_u(candidate, baseline);
    c.effect = a12(baseline, candidate);
    if (c.p_value < kSignificance) c.verdict = c.effect > 0.5 ? Verdict::Win : (c.effect < 0.5 ? Verdict::Loss : Verdict::Tie);
    return c;
}

Comparison compare_pmeasure(std::size_t candidate_detected, std::size_t baseline_detected, std::size_t n_t) {
    if (candidate_detected > n_t || baseline_detected > n_t) throw ParameterError("detections exceed N_t");
    Comparison c;
    c.p_value = fisher_exact(candidate_detected, n_t - candidate_detected, baseline_detected, n_t - baseline_detected);
    c.effect = odds_ratio(candidate_detected, baseline_detected, n_t);
    if (c.p_value < kSignificance) c.verdict = c.effect > 1.0 ? Verdict::Win : (c.effect < 1.0 ? Verdict::Loss : Verdict::Tie);
    return c;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    const double half = 1.959963984540054 * s.stddev / std::sqrt(static_cast<double>(s.count));
    s.ci95_low = s.mean - half;
    s.ci95_high = s.mean + half;
    return s;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ParameterError("median of an empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace lshart
