// SPDX-License-Identifier: Apache-2.0

#include "rcabf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rcabf {

const char* to_string(Orientation o)
{
    return o == Orientation::RowTx ? "row" : "column";
}

void ProbeGeometry::validate() const
{
    if (num_rows < 1 || num_cols < 1)
        throw std::invalid_argument("probe needs at least one row and one column element");
    if (!(pitch > 0.0))
        throw std::invalid_argument("probe pitch must be positive");
    if (!(sound_speed > 0.0))
        throw std::invalid_argument("sound speed must be positive");
    if (!(center_frequency > 0.0) || !(bandwidth > 0.0))
        throw std::invalid_argument("centre frequency and bandwidth must be positive");
    if (!(sampling_frequency > 2.0 * (center_frequency + 0.5 * bandwidth)))
        throw std::invalid_argument("sampling frequency " + std::to_string(sampling_frequency) +
                                    " Hz does not cover the pulse band");
}

ProbeGeometry ProbeGeometry::small()
{
    ProbeGeometry g;
    g.num_rows = 32;
    g.num_cols = 32;
    return g;
}

double element_position(const ProbeGeometry& geom, ElementSet set, std::size_t n)
{
    const std::size_t count = geom.element_count(set);
    if (n >= count)
        throw std::out_of_range("element index " + std::to_string(n) + " outside [0, " +
                                std::to_string(count) + ")");
    return (static_cast<double>(n) - 0.5 * static_cast<double>(count - 1)) * geom.pitch;
}

std::vector<double> element_positions(const ProbeGeometry& geom, ElementSet set)
{
    std::vector<double> r(geom.element_count(set));
    for (std::size_t n = 0; n < r.size(); ++n)
        r[n] = element_position(geom, set, n);
    return r;
}

double tukey_weight(double u, double alpha)
{
    if (u < 0.0 || u > 1.0)
        return 0.0;
    if (alpha <= 0.0)
        return 1.0;
    const double edge = 0.5 * alpha;
    // Fold onto the left half; the window is symmetric.
    const double v = std::min(u, 1.0 - u);
    if (v >= edge)
        return 1.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (v / edge - 1.0)));
}

std::vector<double> tukey_window(std::size_t count, double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("Tukey alpha must lie in [0, 1]");
    if (count < 2)
        throw std::invalid_argument("Tukey window needs at least two samples");
    std::vector<double> w(count);
    const double last = static_cast<double>(count - 1);
    for (std::size_t n = 0; n < count; ++n)
        w[n] = tukey_weight(static_cast<double>(n) / last, alpha);
    return w;
}

std::vector<double> apodization(const ProbeGeometry& geom, ElementSet set, double alpha)
{
    const std::size_t count = geom.element_count(set);
    if (count == 1)
        return {1.0};
    return tukey_window(count, alpha);
}

std::vector<TransmitEvent> TransmitSchedule::events_of(Orientation o) const
{
    std::vector<TransmitEvent> out;
    for (const auto& e : events)
        if (e.orientation == o)
            out.push_back(e);
    return out;
}

TransmitSchedule make_schedule(std::size_t n_per_orientation, double range)
{
    if (n_per_orientation < 1)
        throw std::invalid_argument("schedule needs at least one angle per orientation");
    if (!(range >= 0.0) || !(range < std::numbers::pi))
        throw std::invalid_argument("angle range must lie in [0, pi)");

    TransmitSchedule s;
    s.angle_count_per_orientation = n_per_orientation;
    s.angle_range = range;

    std::vector<double> angles(n_per_orientation, 0.0);
    if (n_per_orientation > 1) {
        const double step = range / static_cast<double>(n_per_orientation - 1);
        for (std::size_t k = 0; k < n_per_orientation; ++k)
            angles[k] = -0.5 * range + static_cast<double>(k) * step;
        // Exact symmetry about zero regardless of rounding in the step.
        for (std::size_t k = 0; k < n_per_orientation / 2; ++k)
            angles[n_per_orientation - 1 - k] = -angles[k];
        if (n_per_orientation % 2 == 1)
            angles[n_per_orientation / 2] = 0.0;
    }

    std::size_t index = 0;
    for (Orientation o : {Orientation::RowTx, Orientation::ColumnTx})
        for (double a : angles)
            s.events.push_back({o, a, index++});
    return s;
}

void VoxelGrid::validate() const
{
    for (int a = 0; a < 3; ++a) {
        if (!(spacing[a] > 0.0))
            throw std::invalid_argument("voxel spacing must be positive on every axis");
        if (dims[a] < 1)
            throw std::invalid_argument("voxel grid dims must be at least 1 on every axis");
    }
    if (!(origin[2] > 0.0))
        throw std::invalid_argument("all voxels must lie at positive depth");
}

VoxelGrid VoxelGrid::centered(const Vec3& center, const std::array<std::size_t, 3>& dims,
                              const Vec3& spacing)
{
    VoxelGrid g;
    g.dims = dims;
    g.spacing = spacing;
    for (int a = 0; a < 3; ++a)
        g.origin[a] = center[a] - 0.5 * static_cast<double>(dims[a] - 1) * spacing[a];
    return g;
}

}  // namespace rcabf
