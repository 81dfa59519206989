// SPDX-License-Identifier: Apache-2.0
//
// Analytic point-scatterer simulator for plane-wave row-column acquisitions.
//
// Every scatterer returns a copy of the transmit pulse delayed by the plane-wave
// arrival time plus the shortest path back to each receiving strip. Transmit
// apodization weights the plane wave at the scatterer's back-projection onto
// the firing aperture; receive spreading is 1 / r. Element directivity,
// attenuation and transmit-side spreading are not modelled.

#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "rcabf/channel_data.hpp"
#include "rcabf/geometry.hpp"

namespace rcabf {

struct Scatterer {
    Vec3 position{0.0, 0.0, 0.0};
    double amplitude = 1.0;
};

enum class RegionRole { HighScatter, Anechoic, Background };

const char* to_string(RegionRole role);

// Cylinder whose axis runs parallel to y through (x, z).
struct Tube {
    double x = 0.0;
    double z = 0.0;
    double radius = 0.0;
};

struct Box {
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{0.0, 0.0, 0.0};
};

struct LabeledRegion {
    std::variant<Tube, Box> shape;
    RegionRole role = RegionRole::Background;

    bool contains(const Vec3& p) const;
};

struct Phantom {
    std::vector<Scatterer> scatterers;
    std::vector<LabeledRegion> regions;
    // Positions drawn before anechoic rejection (zero for hand-built phantoms).
    std::size_t drawn = 0;
};

struct PulseModel {
    double center_frequency = 5.0e6;  // Hz
    double bandwidth = 6.0e6;         // Hz, -6 dB width of the Gaussian spectrum
    double amplitude = 1.0;
    double duration = 0.0;  // s; 0 selects 8 envelope standard deviations

    double envelope_sigma() const;
    double effective_duration() const;
    /// Requires positive frequencies and a duration holding >= 99 % of the envelope energy.
    void validate() const;

    static PulseModel from_probe(const ProbeGeometry& geom);
};

struct SampledPulse {
    std::vector<double> samples;
    double sampling_frequency = 0.0;
    std::size_t center = 0;  // index of the envelope peak (t = 0)
};

/// Gaussian-modulated cosine, cosine phase zero at the envelope peak.
SampledPulse make_pulse(const PulseModel& model, double fs);

using RfDataSet = ChannelData<double>;

struct TimeWindow {
    double t_start = 0.0;
    std::size_t n_samples = 0;
};

/// A record long enough that every voxel of `grid` can be beamformed for every
/// event in `schedule`, with `margin` seconds of slack on both ends.
TimeWindow acquisition_window(const ProbeGeometry& geom, const TransmitSchedule& schedule,
                              const VoxelGrid& grid, const PulseModel& pulse,
                              double margin = 2.0e-6);

struct SynthesisOptions {
    TimeWindow window;
    double tx_apod_alpha = 0.5;
    std::size_t pulse_oversampling = 256;
    unsigned workers = 0;
};

RfDataSet simulate_rf(const ProbeGeometry& geom, const Phantom& phantom,
                      const TransmitSchedule& schedule, const PulseModel& pulse,
                      const SynthesisOptions& options);

/// Adds white Gaussian noise so that total signal power / noise power = 10^(snr_db / 10).
RfDataSet add_noise(const RfDataSet& rf, double snr_db, std::uint64_t seed);

enum class RandomStream : std::uint64_t { Phantom = 1, Noise = 2 };

/// Independent generator for one named stream of a run seed.
std::mt19937_64 make_stream(std::uint64_t seed, RandomStream stream);

/// Unit scatterers on the probe axis, one per depth.
Phantom make_point_phantom(const std::vector<double>& depths);

struct CystPhantomSpec {
    std::vector<double> depths{15e-3, 35e-3, 55e-3, 75e-3};
    double radius = 3e-3;
    double anechoic_x = -6e-3;
    double high_scatter_x = 6e-3;
    double high_scatter_gain = 10.0;
    double density = 10.0;  // scatterers per resolution cell
    // Scatterer bounding box.
    Vec3 lo{-14e-3, -14e-3, 8e-3};
    Vec3 hi{14e-3, 14e-3, 82e-3};
    // When positive, scatterers are only drawn within +-band_half_height of each depth.
    double band_half_height = 0.0;
    // Resolution cell volume (m^3) used to turn density into a count.
    double resolution_cell = 0.0;
};

/// Lateral x elevational x axial resolution cell at `depth`: (lambda z / D_x)(lambda z / D_y)(c / 2B).
double resolution_cell_volume(const ProbeGeometry& geom, double depth);

/// Speckle background with anechoic and high-scatter tubes at each depth.
/// Amplitudes are N(0, 1), multiplied by high_scatter_gain inside high-scatter tubes.
Phantom make_cyst_phantom(const CystPhantomSpec& spec, std::uint64_t seed);

}  // namespace rcabf
