// SPDX-License-Identifier: Apache-2.0
//
// Row-column delay-and-sum: one complex volume per transmit event.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "rcabf/geometry.hpp"
#include "rcabf/sigproc.hpp"
#include "rcabf/volume.hpp"

namespace rcabf {

/// Plane-wave arrival time at in-plane coordinate `u` and depth `z`.
double tx_delay(double u, double z, double steer_angle, double c);

/// Shortest return path to a strip element at position `r_n` across the strip.
double rx_delay(double v, double z, double r_n, double c);

/// Round-trip delay for voxel `voxel`, receiving element `n` of `event`.
/// RowTx uses x for the transmit term and y for the receive term; ColumnTx swaps them.
double total_delay(const TransmitEvent& event, const Vec3& voxel, std::size_t n,
                   const ProbeGeometry& geom);

struct PerTxVolume {
    Volume<std::complex<double>> values;
    TransmitEvent event;
};

struct DasOptions {
    double rx_apod_alpha = 0.5;
    unsigned workers = 0;
};

/// Receive-apodized delay-and-sum of one event with carrier phase restored:
/// V(R) = sum_n w_n * iq(n, d) * exp(+i 2 pi f_c d), d = total_delay(n, R).
/// `event` indexes into the events of `iq`.
PerTxVolume das_volume(const IqDataSet& iq, std::size_t event, const VoxelGrid& grid,
                       const ProbeGeometry& geom, std::span<const double> rx_apod,
                       unsigned workers = 0);

/// das_volume for every event in `iq`, with Tukey receive apodization.
std::vector<PerTxVolume> das_volumes(const IqDataSet& iq, const VoxelGrid& grid,
                                     const ProbeGeometry& geom, const DasOptions& options = {});

}  // namespace rcabf
