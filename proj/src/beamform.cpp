// SPDX-License-Identifier: Apache-2.0

#include "rcabf/beamform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rcabf/parallel.hpp"

namespace rcabf {

double tx_delay(double u, double z, double steer_angle, double c)
{
    return (z * std::cos(steer_angle) + u * std::sin(steer_angle)) / c;
}

double rx_delay(double v, double z, double r_n, double c)
{
    const double dv = v - r_n;
    return std::sqrt(z * z + dv * dv) / c;
}

double total_delay(const TransmitEvent& event, const Vec3& voxel, std::size_t n,
                   const ProbeGeometry& geom)
{
    const int a = steering_axis(event.orientation);
    const int b = receive_axis(event.orientation);
    const double r_n = element_position(geom, receive_set(event.orientation), n);
    return tx_delay(voxel[a], voxel[2], event.steer_angle, geom.sound_speed) +
           rx_delay(voxel[b], voxel[2], r_n, geom.sound_speed);
}

PerTxVolume das_volume(const IqDataSet& iq, std::size_t event, const VoxelGrid& grid,
                       const ProbeGeometry& geom, std::span<const double> rx_apod,
                       unsigned workers)
{
    grid.validate();
    if (event >= iq.event_count())
        throw std::out_of_range("event " + std::to_string(event) + " not in IQ data");
    const TransmitEvent& ev = iq.event(event);
    const ElementSet rx_set = receive_set(ev.orientation);
    const std::size_t n_rx = geom.element_count(rx_set);
    if (iq.channel_count(event) != n_rx)
        throw std::invalid_argument("IQ channel count does not match the receiving aperture");
    if (rx_apod.size() != n_rx)
        throw std::invalid_argument("receive apodization length does not match the aperture");
    if (iq.carrier != geom.center_frequency)
        throw std::invalid_argument("IQ carrier differs from the probe centre frequency");

    const int a = steering_axis(ev.orientation);
    const int b = receive_axis(ev.orientation);
    const double c = geom.sound_speed;
    const double w = 2.0 * std::numbers::pi * geom.center_frequency;
    const auto r = element_positions(geom, rx_set);

    PerTxVolume out{Volume<std::complex<double>>(grid), ev};
    const std::size_t n_a = grid.dims[a];
    const std::size_t n_b = grid.dims[b];
    const std::size_t n_z = grid.dims[2];

    // The receive term depends on (v, z) only and the transmit term on (u, z)
    // only, so each factor is evaluated once per line and per plane.
    parallel_for(n_z * n_b, workers, [&](std::size_t job) {
        const std::size_t iz = job / n_b;
        const std::size_t ib = job % n_b;
        const double z = grid.coord(2, iz);
        const double v = grid.coord(b, ib);

        std::vector<double> d_rx(n_rx);
        std::vector<std::complex<double>> rx_phase(n_rx);
        for (std::size_t n = 0; n < n_rx; ++n) {
            d_rx[n] = rx_delay(v, z, r[n], c);
            rx_phase[n] = rx_apod[n] * std::polar(1.0, w * d_rx[n]);
        }

        std::array<std::size_t, 3> idx{};
        idx[2] = iz;
        idx[b] = ib;
        for (std::size_t ia = 0; ia < n_a; ++ia) {
            idx[a] = ia;
            const double d_tx = tx_delay(grid.coord(a, ia), z, ev.steer_angle, c);
            std::complex<double> acc{};
            for (std::size_t n = 0; n < n_rx; ++n) {
                if (rx_apod[n] == 0.0)
                    continue;
                acc += sample_at(iq, event, n, d_tx + d_rx[n]) * rx_phase[n];
            }
            out.values(idx[0], idx[1], idx[2]) = acc * std::polar(1.0, w * d_tx);
        }
    });
    return out;
}

std::vector<PerTxVolume> das_volumes(const IqDataSet& iq, const VoxelGrid& grid,
                                     const ProbeGeometry& geom, const DasOptions& options)
{
    const auto row_apod = apodization(geom, ElementSet::Rows, options.rx_apod_alpha);
    const auto col_apod = apodization(geom, ElementSet::Columns, options.rx_apod_alpha);
    std::vector<PerTxVolume> out;
    out.reserve(iq.event_count());
    for (std::size_t e = 0; e < iq.event_count(); ++e) {
        const auto& apod =
            receive_set(iq.event(e).orientation) == ElementSet::Rows ? row_apod : col_apod;
        out.push_back(das_volume(iq, e, grid, geom, apod, options.workers));
    }
    return out;
}

}  // namespace rcabf
