// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "rcabf/geometry.hpp"

namespace rcabf {

// Dense values on a VoxelGrid, stored x-fastest.
template <typename T>
class Volume {
public:
    Volume() = default;
    explicit Volume(const VoxelGrid& grid, T fill = T{}) : grid_(grid), data_(grid.size(), fill) {}

    const VoxelGrid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& operator()(std::size_t ix, std::size_t iy, std::size_t iz)
    {
        return data_[grid_.linear(ix, iy, iz)];
    }
    const T& operator()(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return data_[grid_.linear(ix, iy, iz)];
    }

private:
    VoxelGrid grid_;
    std::vector<T> data_;
};

}  // namespace rcabf
