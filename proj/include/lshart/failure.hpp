#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lshart/domain.hpp"

namespace lshart {

enum class PatternKind { Block, Strip, Point };

std::string to_string(PatternKind kind);
PatternKind parse_pattern_kind(const std::string& name);

/// Axis-aligned box with closed-lower / open-upper membership.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    bool contains(std::span<const double> p) const noexcept;
    double volume() const noexcept;
    /// True when the interiors intersect. Boxes that only share a face are disjoint.
    bool overlaps(const Box& other) const noexcept;
};

/// Band { x : -width/2 <= normal . x - offset < width/2 } with a unit normal.
/// In two dimensions `chord` holds the two boundary points that define the
/// centre line; higher-dimensional slabs leave it empty.
struct Slab {
    std::vector<double> normal;
    double offset = 0.0;
    double width = 0.0;
    std::vector<std::vector<double>> chord;

    bool contains(std::span<const double> p) const noexcept;
};

/// Simulated fault geometry inside the unit domain [0,1)^d.
class FailurePattern {
public:
    FailurePattern(PatternKind kind, std::size_t dims, double theta, std::vector<Box> boxes);
    FailurePattern(std::size_t dims, double theta, Slab slab);

    PatternKind kind() const noexcept { return kind_; }
    std::size_t dims() const noexcept { return dims_; }
    double theta() const noexcept { return theta_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }
    const std::optional<Slab>& slab() const noexcept { return slab_; }

    bool is_failure(std::span<const double> p) const noexcept;
    bool is_failure(const Point& p) const noexcept { return is_failure(p.coords()); }

    nlohmann::json to_json() const;
    static FailurePattern from_json(const nlohmann::json& j);

private:
    PatternKind kind_;
    std::size_t dims_;
    double theta_;
    std::vector<Box> boxes_;
    std::optional<Slab> slab_;
};

inline bool is_failure(const FailurePattern& pattern, const Point& p) { return pattern.is_failure(p); }

FailurePattern make_block(std::size_t dims, double theta, SeededRng& rng);

/// Two-dimensional strip around a random chord joining opposite edges of the
/// unit square. Chord endpoints stay at least `kStripCornerMargin` from every corner.
FailurePattern make_strip(double theta, SeededRng& rng);
/// Strip in any dimension. On the line it is an interval of length theta, in
/// 2-D it is `make_strip(theta, rng)`, and above that a slab with a random
/// normal through a random interior point.
FailurePattern make_strip(std::size_t dims, double theta, SeededRng& rng);
/// Strip centred on the line through chord endpoints `a` and `b`.
FailurePattern make_strip_from_chord(const std::vector<double>& a, const std::vector<double>& b, double theta);

FailurePattern make_point(std::size_t dims, double theta, SeededRng& rng);

FailurePattern make_pattern(PatternKind kind, std::size_t dims, double theta, SeededRng& rng);

/// Exact volume of { x in [0,1]^d : lo <= normal . x < hi }.
double slab_volume(std::span<const double> normal, double lo, double hi);

inline constexpr double kStripCornerMargin = 0.1;
inline constexpr std::size_t kPointRegions = 25;
inline constexpr std::size_t kMaxPointRejections = 100000;

}  // namespace lshart
