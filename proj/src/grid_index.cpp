#include "lshart/grid_index.hpp"

#include <cmath>
#include <limits>

#include "lshart/error.hpp"

namespace lshart {

namespace {

// partitions^dims, or 0 when it does not fit in 62 bits.
std::uint64_t checked_power(std::size_t base, std::size_t exp) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (r > (std::uint64_t{1} << 62) / base) return 0;
        r *= base;
    }
    return r;
}

}  // namespace

GridIndex::GridIndex(const InputDomain& domain, std::size_t initial_partitions, std::size_t tau)
    : lower_(domain.lower()), tau_(tau), partitions_(initial_partitions), store_(domain.dims()) {
    if (initial_partitions == 0) throw ParameterError("initial partitions p0 must be at least 1");
    if (tau == 0) throw ParameterError("cell density threshold tau must be at least 1");
    extent_.resize(domain.dims());
    for (std::size_t i = 0; i < extent_.size(); ++i) extent_[i] = domain.upper()[i] - domain.lower()[i];
    cell_count_ = checked_power(partitions_, domain.dims());
    if (cell_count_ == 0) throw ParameterError("grid has too many cells for this dimension");

    const std::size_t d = domain.dims();
    const std::uint64_t combos = checked_power(3, d);
    if (combos == 0) throw ParameterError("grid neighborhood too large for this dimension");
    offsets_.reserve(combos);
    std::vector<std::int64_t> off(d, -1);
    for (std::uint64_t c = 0; c < combos; ++c) {
        offsets_.push_back(off);
        for (std::size_t i = 0; i < d; ++i) {
            if (++off[i] <= 1) break;
            off[i] = -1;
        }
    }
}

std::vector<std::int64_t> GridIndex::cell_coords(std::span<const double> p) const {
    std::vector<std::int64_t> c(p.size());
    const auto parts = static_cast<std::int64_t>(partitions_);
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto k = static_cast<std::int64_t>(std::floor((p[i] - lower_[i]) / extent_[i] * static_cast<double>(parts)));
        c[i] = std::clamp<std::int64_t>(k, 0, parts - 1);
    }
    return c;
}

std::uint64_t GridIndex::key_of(std::span<const std::int64_t> coords) const noexcept {
    std::uint64_t key = 0;
    for (std::size_t i = coords.size(); i-- > 0;) key = key * partitions_ + static_cast<std::uint64_t>(coords[i]);
    return key;
}

std::uint64_t GridIndex::cell_of(std::span<const double> p) const {
    const auto c = cell_coords(p);
    return key_of(c);
}

void GridIndex::insert(std::span<const double> p) {
    if (p.size() != store_.dims()) throw ContractViolation("inserted point has the wrong dimension");
    const auto id = static_cast<std::uint32_t>(store_.size());
    store_.push_back(p);
    cells_[cell_of(p)].push_back(id);

    if (static_cast<double>(store_.size()) > static_cast<double>(tau_) * static_cast<double>(cell_count_)) {
        const std::uint64_t next = checked_power(partitions_ * 2, store_.dims());
        if (next != 0) {
            partitions_ *= 2;
            cell_count_ = next;
            rebuild();
        }
    }
}

void GridIndex::rebuild() {
    cells_.clear();
    for (std::size_t i = 0; i < store_.size(); ++i) cells_[cell_of(store_.at(i))].push_back(static_cast<std::uint32_t>(i));
}

double GridIndex::nearest_distance(std::span<const double> q) const {
    if (cells_.empty()) return kInfinity;
    const auto centre = cell_coords(q);
    const auto parts = static_cast<std::int64_t>(partitions_);
    const std::size_t d = store_.dims();
    std::vector<std::int64_t> cell(d);
    double best = kInfinity;
    for (const auto& off : offsets_) {
        bool inside = true;
        for (std::size_t i = 0; i < d; ++i) {
            cell[i] = centre[i] + off[i];
            if (cell[i] < 0 || cell[i] >= parts) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        auto it = cells_.find(key_of(cell));
        if (it == cells_.end()) continue;
        for (std::uint32_t id : it->second) {
            const double s = squared_distance_unchecked(store_.row(id), q.data(), d);
            if (s < best) best = s;
        }
    }
    return std::sqrt(best);
}

}  // namespace lshart
