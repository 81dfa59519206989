// SPDX-License-Identifier: Apache-2.0
//
// Row-column array probe layout, transmit schedules, apodization windows and
// the reconstruction voxel grid.
//
// Coordinate conventions used throughout the library:
//   * z is depth (positive into the medium), the probe face is z = 0.
//   * Row elements are strips positioned along x. A row transmission (RowTx)
//     therefore steers its plane wave in the x-z plane.
//   * Column elements are strips positioned along y, orthogonal to the rows.
//     A column transmission (ColumnTx) steers in the y-z plane.
//   * A RowTx event is received on the columns and vice versa, so the receive
//     delay of a RowTx event depends on the voxel y coordinate only.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace rcabf {

using Vec3 = std::array<double, 3>;

enum class ElementSet { Rows, Columns };
enum class Orientation { RowTx, ColumnTx };

constexpr ElementSet transmit_set(Orientation o)
{
    return o == Orientation::RowTx ? ElementSet::Rows : ElementSet::Columns;
}

constexpr ElementSet receive_set(Orientation o)
{
    return o == Orientation::RowTx ? ElementSet::Columns : ElementSet::Rows;
}

// Axis index (0 = x, 1 = y) along which the transmit wave of `o` is steered.
constexpr int steering_axis(Orientation o) { return o == Orientation::RowTx ? 0 : 1; }

// Axis index along which the receiving elements of `o` are laid out.
constexpr int receive_axis(Orientation o) { return 1 - steering_axis(o); }

const char* to_string(Orientation o);

struct ProbeGeometry {
    std::size_t num_rows = 128;          // M
    std::size_t num_cols = 128;          // N
    double pitch = 0.2e-3;               // m
    double center_frequency = 5.0e6;     // Hz
    double bandwidth = 6.0e6;            // Hz, -6 dB
    double sampling_frequency = 40.0e6;  // Hz, raw RF
    double sound_speed = 1540.0;         // m/s

    std::size_t element_count(ElementSet set) const
    {
        return set == ElementSet::Rows ? num_rows : num_cols;
    }

    // Strips span the whole aperture of the orthogonal set.
    double element_length(ElementSet set) const
    {
        return static_cast<double>(element_count(set == ElementSet::Rows ? ElementSet::Columns
                                                                         : ElementSet::Rows)) *
               pitch;
    }

    // Distance between the first and last element centres of `set`.
    double aperture_span(ElementSet set) const
    {
        return static_cast<double>(element_count(set) - 1) * pitch;
    }

    double wavelength() const { return sound_speed / center_frequency; }

    /// Throws std::invalid_argument when the probe is not physically usable
    /// (empty sets, non-positive pitch or sound speed, RF undersampled).
    void validate() const;

    /// 32 + 32 element probe with the same pitch and pulse as the 128 + 128 default.
    static ProbeGeometry small();
};

/// Centre of element `n` of `set`, measured along that set's layout axis.
/// The aperture is centred on the probe origin: r(n) = (n - (count - 1) / 2) * pitch.
double element_position(const ProbeGeometry& geom, ElementSet set, std::size_t n);

std::vector<double> element_positions(const ProbeGeometry& geom, ElementSet set);

/// Sampled Tukey (tapered cosine) window. alpha = 0 is rectangular, alpha = 1 is Hann.
std::vector<double> tukey_window(std::size_t count, double alpha);

/// Continuous Tukey taper at normalized aperture coordinate u in [0, 1]; zero outside.
double tukey_weight(double u, double alpha);

/// Per-element apodization for `set`. A single-element set gets weight 1.
std::vector<double> apodization(const ProbeGeometry& geom, ElementSet set, double alpha);

struct TransmitEvent {
    Orientation orientation = Orientation::RowTx;
    double steer_angle = 0.0;  // rad
    std::size_t index = 0;     // firing order
};

struct TransmitSchedule {
    std::size_t angle_count_per_orientation = 0;
    double angle_range = 0.0;  // rad, full span
    std::vector<TransmitEvent> events;

    std::size_t size() const { return events.size(); }
    std::vector<TransmitEvent> events_of(Orientation o) const;
};

/// Equal row and column angle sets evenly spaced on [-range/2, +range/2].
/// Events are ordered rows first, then columns.
TransmitSchedule make_schedule(std::size_t n_per_orientation, double range);

struct VoxelGrid {
    Vec3 origin{0.0, 0.0, 0.0};  // position of voxel (0, 0, 0)
    Vec3 spacing{0.2e-3, 0.2e-3, 0.1e-3};
    std::array<std::size_t, 3> dims{1, 1, 1};

    std::size_t size() const { return dims[0] * dims[1] * dims[2]; }

    double coord(int axis, std::size_t i) const
    {
        return origin[axis] + static_cast<double>(i) * spacing[axis];
    }

    Vec3 position(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return {coord(0, ix), coord(1, iy), coord(2, iz)};
    }

    // x-fastest ordering.
    std::size_t linear(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return ix + dims[0] * (iy + dims[1] * iz);
    }

    // Lower and upper voxel-centre coordinates along `axis`.
    double lo(int axis) const { return origin[axis]; }
    double hi(int axis) const { return coord(axis, dims[axis] - 1); }

    void validate() const;

    static VoxelGrid centered(const Vec3& center, const std::array<std::size_t, 3>& dims,
                              const Vec3& spacing);

    bool operator==(const VoxelGrid&) const = default;
};

}  // namespace rcabf
