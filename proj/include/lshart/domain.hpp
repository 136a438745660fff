#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace lshart {

/// A test input: a d-dimensional vector of finite reals.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dims) : coords_(dims, 0.0) {}
    explicit Point(std::vector<double> coords);
    Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

    std::size_t dims() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    double& operator[](std::size_t i) noexcept { return coords_[i]; }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }
    const std::vector<double>& values() const noexcept { return coords_; }

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::vector<double> coords_;
};

/// 64-bit xoshiro256** generator seeded through splitmix64.
///
/// Satisfies UniformRandomBitGenerator so it composes with <random>
/// distributions. Not thread-safe; each run owns its own instance.
class SeededRng {
public:
    using result_type = std::uint64_t;

    explicit SeededRng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard normal draw.
    double gaussian();

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

/// Mixes a base seed with a stream identifier so independent runs get
/// decorrelated generators.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept;

/// Axis-aligned box of admissible inputs. Sampling is half-open per axis.
///
/// A binary domain is the unit cube whose sampled coordinates are restricted
/// to {0, 1}; configurations of on/off parameters embed into it.
class InputDomain {
public:
    InputDomain(std::vector<double> lower, std::vector<double> upper, bool binary = false);

    static InputDomain unit(std::size_t dims);
    static InputDomain binary(std::size_t dims);

    std::size_t dims() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    bool is_binary() const noexcept { return binary_; }

    /// Hypervolume of the box.
    double volume() const noexcept;
    bool contains(const Point& p) const noexcept;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    bool binary_ = false;
};

double euclidean_distance(const Point& a, const Point& b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Squared distance without dimension checks; hot loop helper.
inline double squared_distance_unchecked(const double* a, const double* b, std::size_t d) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

Point sample_uniform(const InputDomain& domain, SeededRng& rng);
/// Writes a uniform sample into `out` (resized to the domain dimension).
void sample_uniform_into(const InputDomain& domain, SeededRng& rng, std::vector<double>& out);

double domain_diameter(const InputDomain& domain);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace lshart
