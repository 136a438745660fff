#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "lshart/neighbor_index.hpp"

namespace lshart {

/// Distance-aware forgetting grid.
///
/// The domain is cut into `partitions()` equal slices per axis. A query only
/// looks at its own cell and the adjacent ones (at most 3^d cells), which
/// makes the answer approximate. After an insertion pushes the mean cell
/// occupancy above `tau`, the slice count doubles and every point is re-binned.
class GridIndex final : public NeighborIndex {
public:
    GridIndex(const InputDomain& domain, std::size_t initial_partitions, std::size_t tau);

    void insert(std::span<const double> p) override;
    double nearest_distance(std::span<const double> q) const override;
    std::size_t size() const noexcept override { return store_.size(); }

    std::size_t partitions() const noexcept { return partitions_; }
    /// partitions()^d; saturates at UINT64_MAX.
    std::uint64_t cell_count() const noexcept { return cell_count_; }
    std::size_t occupied_cells() const noexcept { return cells_.size(); }
    std::uint64_t cell_of(std::span<const double> p) const;

private:
    std::vector<std::int64_t> cell_coords(std::span<const double> p) const;
    std::uint64_t key_of(std::span<const std::int64_t> coords) const noexcept;
    void rebuild();

    std::vector<double> lower_;
    std::vector<double> extent_;
    std::size_t tau_;
    std::size_t partitions_;
    std::uint64_t cell_count_ = 0;
    PointStore store_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
    std::vector<std::vector<std::int64_t>> offsets_;
};

/// Neighborhood-restricted nearest distance (+infinity when every nearby cell is empty).
inline double df_nn_distance(const GridIndex& grid, std::span<const double> c) { return grid.nearest_distance(c); }

}  // namespace lshart
