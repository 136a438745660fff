#include "lshart/domain.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lshart/error.hpp"

namespace lshart {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double c : coords_) {
        if (!std::isfinite(c)) throw ContractViolation("point coordinate is not finite");
    }
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

SeededRng::result_type SeededRng::operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double SeededRng::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) noexcept {
    const double x = lo + (hi - lo) * uniform();
    // Rounding can land exactly on hi for wide intervals; keep the interval half-open.
    return x < hi ? x : std::nextafter(hi, lo);
}

std::uint64_t SeededRng::below(std::uint64_t bound) noexcept {
    // Lemire's nearly divisionless method.
    __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<__uint128_t>((*this)()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double SeededRng::gaussian() {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(*this);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t state = base ^ (stream * 0xD1B54A32D192ED03ULL);
    splitmix64(state);
    return splitmix64(state);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(base, a), b);
}

InputDomain::InputDomain(std::vector<double> lower, std::vector<double> upper, bool binary)
    : lower_(std::move(lower)), upper_(std::move(upper)), binary_(binary) {
    if (lower_.empty()) throw ParameterError("input domain needs at least one dimension");
    if (lower_.size() != upper_.size()) throw ParameterError("domain bound lengths differ");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
            throw ParameterError("domain bounds must satisfy lower < upper on axis " + std::to_string(i));
        }
    }
    const double v = volume();
    if (!std::isfinite(v) || v <= 0.0) throw ParameterError("domain volume must be finite and positive");
}

InputDomain InputDomain::unit(std::size_t dims) {
    return InputDomain(std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0));
}

InputDomain InputDomain::binary(std::size_t dims) {
    return InputDomain(std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0), true);
}

double InputDomain::volume() const noexcept {
    double v = 1.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) v *= upper_[i] - lower_[i];
    return v;
}

bool InputDomain::contains(const Point& p) const noexcept {
    if (p.dims() != dims()) return false;
    for (std::size_t i = 0; i < dims(); ++i) {
        if (binary_) {
            if (p[i] != lower_[i] && p[i] != upper_[i]) return false;
        } else if (p[i] < lower_[i] || p[i] >= upper_[i]) {
            return false;
        }
    }
    return true;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ContractViolation("distance between points of dimension " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
    }
    return std::sqrt(squared_distance_unchecked(a.data(), b.data(), a.size()));
}

double euclidean_distance(const Point& a, const Point& b) { return euclidean_distance(a.coords(), b.coords()); }

void sample_uniform_into(const InputDomain& domain, SeededRng& rng, std::vector<double>& out) {
    const auto& lo = domain.lower();
    const auto& hi = domain.upper();
    out.resize(domain.dims());
    if (domain.is_binary()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (rng() >> 63) ? hi[i] : lo[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo[i], hi[i]);
    }
}

Point sample_uniform(const InputDomain& domain, SeededRng& rng) {
    std::vector<double> c;
    sample_uniform_into(domain, rng, c);
    return Point(std::move(c));
}

double domain_diameter(const InputDomain& domain) {
    return euclidean_distance(std::span<const double>(domain.lower()), std::span<const double>(domain.upper()));
}

}  // namespace lshart
