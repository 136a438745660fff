#include "lshart/failure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lshart/error.hpp"

namespace lshart {

std::string to_string(PatternKind kind) {
    switch (kind) {
        case PatternKind::Block: return "block";
        case PatternKind::Strip: return "strip";
        case PatternKind::Point: return "point";
    }
    return "unknown";
}

PatternKind parse_pattern_kind(const std::string& name) {
    if (name == "block") return PatternKind::Block;
    if (name == "strip") return PatternKind::Strip;
    if (name == "point") return PatternKind::Point;
    throw ParameterError("unknown failure pattern '" + name + "'");
}

bool Box::contains(std::span<const double> p) const noexcept {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (p[i] < lower[i] || p[i] >= upper[i]) return false;
    }
    return true;
}

double Box::volume() const noexcept {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

bool Box::overlaps(const Box& other) const noexcept {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < other.upper[i] && other.lower[i] < upper[i])) return false;
    }
    return true;
}

bool Slab::contains(std::span<const double> p) const noexcept {
    double proj = 0.0;
    for (std::size_t i = 0; i < normal.size(); ++i) proj += normal[i] * p[i];
    const double rel = proj - offset;
    return rel >= -0.5 * width && rel < 0.5 * width;
}

FailurePattern::FailurePattern(PatternKind kind, std::size_t dims, double theta, std::vector<Box> boxes)
    : kind_(kind), dims_(dims), theta_(theta), boxes_(std::move(boxes)) {
    if (kind == PatternKind::Strip) throw ContractViolation("strip patterns are built from a slab");
}

FailurePattern::FailurePattern(std::size_t dims, double theta, Slab slab)
    : kind_(PatternKind::Strip), dims_(dims), theta_(theta), slab_(std::move(slab)) {}

bool FailurePattern::is_failure(std::span<const double> p) const noexcept {
    if (slab_) return slab_->contains(p);
    for (const auto& box : boxes_) {
        if (box.contains(p)) return true;
    }
    return false;
}

nlohmann::json FailurePattern::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    j["dims"] = dims_;
    j["theta"] = theta_;
    auto regions = nlohmann::json::array();
    if (slab_) {
        regions.push_back({{"type", "slab"},
                           {"normal", slab_->normal},
                           {"offset", slab_->offset},
                           {"width", slab_->width},
                           {"chord", slab_->chord}});
    } else {
        for (const auto& b : boxes_) regions.push_back({{"type", "box"}, {"lower", b.lower}, {"upper", b.upper}});
    }
    j["regions"] = std::move(regions);
    return j;
}

FailurePattern FailurePattern::from_json(const nlohmann::json& j) {
    try {
        const auto kind = parse_pattern_kind(j.at("kind").get<std::string>());
        const auto dims = j.at("dims").get<std::size_t>();
        const auto theta = j.at("theta").get<double>();
        const auto& regions = j.at("regions");
        if (kind == PatternKind::Strip) {
            if (regions.size() != 1) throw ParameterError("strip pattern needs exactly one slab region");
            const auto& r = regions.at(0);
            Slab s;
            s.normal = r.at("normal").get<std::vector<double>>();
            s.offset = r.at("offset").get<double>();
            s.width = r.at("width").get<double>();
            if (r.contains("chord")) s.chord = r.at("chord").get<std::vector<std::vector<double>>>();
            if (s.normal.size() != dims) throw ParameterError("slab normal dimension mismatch");
            return FailurePattern(dims, theta, std::move(s));
        }
        std::vector<Box> boxes;
        for (const auto& r : regions) {
            Box b{r.at("lower").get<std::vector<double>>(), r.at("upper").get<std::vector<double>>()};
            if (b.lower.size() != dims || b.upper.size() != dims) throw ParameterError("box dimension mismatch");
            boxes.push_back(std::move(b));
        }
        return FailurePattern(kind, dims, theta, std::move(boxes));
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed pattern JSON: ") + e.what());
    }
}

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("failure rate must lie in (0, 1)");
}

void check_dims(std::size_t dims) {
    if (dims == 0) throw ParameterError("dimension must be positive");
}

Box random_cube(std::size_t dims, double side, SeededRng& rng) {
    Box b{std::vector<double>(dims), std::vector<double>(dims)};
    for (std::size_t i = 0; i < dims; ++i) {
        b.lower[i] = rng.uniform() * (1.0 - side);
        b.upper[i] = b.lower[i] + side;
    }
    return b;
}

struct VolumeEstimate {
    double value;
    double error;  // bound on accumulated rounding error
};

// Volume of { x in [0,1]^d : normal . x < t } via the alternating vertex sum
// for a half-space cut of the unit cube.
VolumeEstimate halfspace_volume_estimate(std::span<const double> normal, double t) {
    std::vector<double> a;
    a.reserve(normal.size());
    for (double n : normal) {
        if (std::abs(n) <= 1e-12) continue;
        if (n < 0.0) t -= n;  // reflect x_i -> 1 - x_i
        a.push_back(std::abs(n));
    }
    const std::size_t k = a.size();
    if (k == 0) return {t > 0.0 ? 1.0 : 0.0, 0.0};
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    if (t <= 0.0) return {0.0, 0.0};
    if (t >= total) return {1.0, 0.0};
    if (k > 24) throw ParameterError("slab volume supports at most 24 active dimensions");

    long double denom = 1.0L;
    for (std::size_t i = 0; i < k; ++i) denom *= static_cast<long double>(i + 1) * a[i];
    long double sum = 0.0L;
    long double magnitude = 0.0L;
    const std::uint64_t subsets = std::uint64_t{1} << k;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        long double shift = 0.0L;
        int bits = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (mask & (std::uint64_t{1} << i)) {
                shift += a[i];
                ++bits;
            }
        }
        const long double r = t - shift;
        if (r <= 0.0L) continue;
        const long double term = std::pow(r, static_cast<long double>(k));
        sum += (bits % 2 == 0) ? term : -term;
        magnitude += term;
    }
    const double eps = static_cast<double>(std::numeric_limits<long double>::epsilon());
    const double value = std::clamp(static_cast<double>(sum / denom), 0.0, 1.0);
    return {value, static_cast<double>(magnitude / denom) * eps * static_cast<double>(4 * k + 4)};
}

double halfspace_volume(std::span<const double> normal, double t) {
    return halfspace_volume_estimate(normal, t).value;
}

// Finds the band width around `offset` whose clipped volume equals theta.
double solve_band_width(std::span<const double> normal, double offset, double theta) {
    auto area = [&](double w) { return slab_volume(normal, offset - 0.5 * w, offset + 0.5 * w); };
    double lo = 0.0;
    double hi = 2.0 * std::sqrt(static_cast<double>(normal.size()));
    if (area(hi) < theta) throw ConstructionError("strip cannot reach the requested failure rate");
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (area(mid) < theta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double w = 0.5 * (lo + hi);
    if (std::abs(area(w) - theta) > 0.01 * theta) {
        throw ConstructionError("strip width search did not converge within 100 bisection steps");
    }
    return w;
}

}  // namespace

double slab_volume(std::span<const double> normal, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return std::max(0.0, halfspace_volume(normal, hi) - halfspace_volume(normal, lo));
}

FailurePattern make_block(std::size_t dims, double theta, SeededRng& rng) {
    check_dims(dims);
    check_theta(theta);
    const double side = std::pow(theta, 1.0 / static_cast<double>(dims));
    if (side > 1.0) throw ParameterError("block side exceeds the unit domain");
    return FailurePattern(PatternKind::Block, dims, theta, {random_cube(dims, side, rng)});
}

FailurePattern make_strip_from_chord(const std::vector<double>& a, const std::vector<double>& b, double theta) {
    check_theta(theta);
    if (a.size() != 2 || b.size() != 2) throw ParameterError("chord endpoints must be 2-D");
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    if (len <= 0.0) throw ParameterError("chord endpoints coincide");
    Slab s;
    s.normal = {-dy / len, dx / len};
    s.offset = s.normal[0] * a[0] + s.normal[1] * a[1];
    s.width = solve_band_width(s.normal, s.offset, theta);
    s.chord = {a, b};
    return FailurePattern(2, theta, std::move(s));
}

FailurePattern make_strip(double theta, SeededRng& rng) {
    check_theta(theta);
    if (theta >= 0.1) throw ParameterError("strip failure rate must be below 0.1");
    const double lo = kStripCornerMargin;
    const double hi = 1.0 - kStripCornerMargin;
    const double u = rng.uniform(lo, hi);
    const double v = rng.uniform(lo, hi);
    // Left/right edges or bottom/top edges, chosen with equal probability.
    if (rng() >> 63) return make_strip_from_chord({0.0, u}, {1.0, v}, theta);
    return make_strip_from_chord({u, 0.0}, {v, 1.0}, theta);
}

FailurePattern make_strip(std::size_t dims, double theta, SeededRng& rng) {
    check_dims(dims);
    check_theta(theta);
    if (dims == 1) {
        // A band on the line is an interval of length theta.
        Slab s;
        s.normal = {1.0};
        s.offset = rng.uniform(0.5 * theta, 1.0 - 0.5 * theta);
        s.width = theta;
        return FailurePattern(1, theta, std::move(s));
    }
    if (dims == 2) return make_strip(theta, rng);
    if (theta >= 0.1) throw ParameterError("strip failure rate must be below 0.1");

    // Reject near-axis-degenerate normals (keeps the vertex sum well conditioned)
    // and centre planes that only clip a corner of the cube.
    const double min_component = 0.05;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<double> n(dims);
        double norm = 0.0;
        for (auto& x : n) {
            x = rng.gaussian();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        bool ok = true;
        for (auto& x : n) {
            x /= norm;
            if (std::abs(x) < min_component) ok = false;
        }
        std::vector<double> centre(dims);
        double offset = 0.0;
        for (std::size_t i = 0; i < dims; ++i) {
            centre[i] = rng.uniform();
            offset += n[i] * centre[i];
        }
        if (!ok) continue;
        const double below = halfspace_volume(n, offset);
        if (below < kStripCornerMargin || below > 1.0 - kStripCornerMargin) continue;
        Slab s;
        s.normal = std::move(n);
        s.offset = offset;
        s.width = solve_band_width(s.normal, s.offset, theta);
        // The band volume is a difference of two vertex sums; both must be
        // accurate to a small fraction of theta.
        const double err = halfspace_volume_estimate(s.normal, s.offset + 0.5 * s.width).error +
                           halfspace_volume_estimate(s.normal, s.offset - 0.5 * s.width).error;
        if (err > 1e-3 * theta) continue;
        return FailurePattern(dims, theta, std::move(s));
    }
    throw ConstructionError("could not sample a strip orientation");
}

FailurePattern make_point(std::size_t dims, double theta, SeededRng& rng) {
    check_dims(dims);
    check_theta(theta);
    const double each = theta / static_cast<double>(kPointRegions);
    const double side = std::pow(each, 1.0 / static_cast<double>(dims));
    if (side > 1.0) throw ParameterError("point region side exceeds the unit domain");

    std::vector<Box> boxes;
    boxes.reserve(kPointRegions);
    std::size_t rejected = 0;
    while (boxes.size() < kPointRegions) {
        Box candidate = random_cube(dims, side, rng);
        const bool clash = std::any_of(boxes.begin(), boxes.end(),
                                       [&](const Box& b) { return b.overlaps(candidate); });
        if (!clash) {
            boxes.push_back(std::move(candidate));
        } else if (++rejected >= kMaxPointRejections) {
            throw ConstructionError("could not place 25 disjoint point regions; failure rate too large");
        }
    }
    return FailurePattern(PatternKind::Point, dims, theta, std::move(boxes));
}

FailurePattern make_pattern(PatternKind kind, std::size_t dims, double theta, SeededRng& rng) {
    switch (kind) {
        case PatternKind::Block: return make_block(dims, theta, rng);
        case PatternKind::Strip: return make_strip(dims, theta, rng);
        case PatternKind::Point: return make_point(dims, theta, rng);
    }
    throw ParameterError("unknown pattern kind");
}

}  // namespace lshart
