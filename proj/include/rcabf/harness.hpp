// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: configuration, the synth -> IQ -> DAS -> compound
// -> metrics pipeline, parameter sweeps and file exports.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcabf/compound.hpp"
#include "rcabf/metrics.hpp"
#include "rcabf/sigproc.hpp"
#include "rcabf/synth.hpp"

namespace rcabf {

enum class PhantomKind { Point, Cyst };

// Execution settings. They never change results, so they are excluded from
// the canonical configuration and its hash.
struct RunSettings {
    unsigned workers = 0;
    std::filesystem::path output_dir = "rcabf_out";
};

struct ExperimentConfig {
    ProbeGeometry probe;

    std::size_t n_angles = 10;  // total transmissions, split evenly over rows and columns
    double angle_range = 0.17453292519943295;  // rad, full span (10 deg)

    PhantomKind phantom = PhantomKind::Point;
    std::vector<double> point_depths{50e-3};
    CystPhantomSpec cyst;

    Vec3 grid_center{0.0, 0.0, 50e-3};
    std::array<std::size_t, 3> grid_dims{129, 129, 49};
    Vec3 grid_spacing{0.2e-3, 0.2e-3, 0.05e-3};

    bool noise = true;
    double snr_db = 20.0;
    std::uint64_t seed = 1;

    double tx_apod_alpha = 0.5;
    double rx_apod_alpha = 0.5;
    double lpf_cutoff = 3.0e6;
    std::size_t decimation = 2;
    double lpf_transition = 2.0e6;
    std::size_t pulse_oversampling = 256;
    PairMode pair_mode = PairMode::ComplexBaseband;
    double dynamic_range_db = 60.0;

    // Cyst regions of interest: boxes of half-width roi_fraction * radius in x
    // and z, +-roi_half_y in y, inside each tube and centred at tissue_x.
    double roi_fraction = 0.5;
    double roi_half_y = 0.2e-3;
    double tissue_x = 0.0;
    std::size_t roi_splits = 4;

    std::vector<Method> methods{Method::DAS, Method::FMAS, Method::RCFMAS};

    RunSettings run;

    VoxelGrid grid() const { return VoxelGrid::centered(grid_center, grid_dims, grid_spacing); }
    TransmitSchedule schedule() const;
    PulseModel pulse() const;
    IqOptions iq_options() const;

    /// Checks every module precondition up front; throws std::invalid_argument.
    void validate() const;
};

/// Point target at 50 mm. Desk scale uses a coarse grid, full scale halves the spacing.
ExperimentConfig psf_preset(bool full = false);
/// Cyst phantom with a grid covering all tubes. Desk scale draws speckle only
/// near the tube depths and images a thin slab around y = 0.
ExperimentConfig cyst_preset(bool full = false);

/// Applies an INI-style file on top of `base`. Unknown sections or keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base);

/// Sorted key = value text covering every field that affects results.
std::string canonical_config(const ExperimentConfig& config);
/// 64-bit FNV-1a over canonical_config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct CystRois {
    double depth = 0.0;
    RoiBox high_scatter;  // Tissue1
    RoiBox tissue;        // Tissue2 for TCR, Tissue for TNR
    RoiBox noise;         // anechoic interior
};

std::vector<CystRois> cyst_rois(const ExperimentConfig& config);

struct MethodResult {
    EnvelopeVolume envelope;
    double compound_seconds = 0.0;
};

struct ExperimentResult {
    std::vector<MethodResult> methods;
    std::vector<MetricsReport> reports;
    // Main-lobe mask shared by every method (from the DAS volume).
    std::optional<PeakMask> mask;
    std::size_t n_events = 0;

    const MethodResult* find(Method m) const;
};

Phantom build_phantom(const ExperimentConfig& config);

/// Synthetic RF for the configured phantom and schedule, noise included.
RfDataSet simulate(const ExperimentConfig& config);

/// IQ demodulation, per-event DAS and every requested compounding method.
ExperimentResult reconstruct(const ExperimentConfig& config, const RfDataSet& rf);

/// simulate + reconstruct.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
    std::size_t n_angles = 0;
    double range_deg = 0.0;
    Method method = Method::DAS;
    std::optional<double> fwhm_x;
    std::optional<double> fwhm_z;
    std::optional<double> pir;
    std::optional<double> pmslr_db;
    double runtime_s = 0.0;
    std::size_t pair_count = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& angle_counts,
                      const std::vector<double>& ranges_deg);

struct DepthStudyRow {
    double depth = 0.0;
    Method method = Method::DAS;
    MeanWithError tcr_db;
    MeanWithError tnr_db;
};

/// TCR and TNR per tube depth and method, each split into roi_splits sub-slabs.
std::vector<DepthStudyRow> depth_study(const ExperimentConfig& config,
                                       const ExperimentResult& result);

// ---- exports ---------------------------------------------------------------

using Metadata = std::map<std::string, std::string>;

/// Writes `<base>.raw` (little-endian float32, x fastest) and `<base>.txt`
/// (key = value sidecar: dims, spacing, origin plus `extra`).
void export_volume(const Volume<double>& volume, const std::filesystem::path& base,
                   const Metadata& extra = {});

/// Reads a volume written by export_volume; `extra` receives the sidecar keys.
Volume<double> read_volume(const std::filesystem::path& base, Metadata* extra = nullptr);

enum class SlicePlane { XY, XZ, YZ };

/// 8-bit portable graymap of the plane at voxel `index` along its normal.
/// [-dynamic_range_db, 0] dB maps linearly onto [0, 255].
void export_slice(const Volume<double>& volume_db, SlicePlane plane, std::size_t index,
                  double dynamic_range_db, const std::filesystem::path& path);

/// Profile through `through` along `axis` as "position_mm,amplitude_db" rows.
void export_profile(const Volume<double>& volume_db, int axis,
                    const std::array<std::size_t, 3>& through, const std::filesystem::path& path);

void write_metrics_csv(const std::vector<MetricsReport>& reports,
                       const std::filesystem::path& path);
void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);
void write_depth_study_csv(const std::vector<DepthStudyRow>& rows,
                           const std::filesystem::path& path);

}  // namespace rcabf
