// SPDX-License-Identifier: Apache-2.0
//
// Point-spread-function and contrast metrics on envelope volumes.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rcabf/volume.hpp"

namespace rcabf {

struct Peak {
    std::array<std::size_t, 3> index{};
    std::size_t linear = 0;
    Vec3 position{};
    double value = 0.0;
};

/// Global maximum; ties resolve to the lowest linear index.
Peak find_peak(const Volume<double>& env);

/// Full width at half of the peak value along `axis` through `peak`, with
/// linear interpolation at both crossings. Throws std::domain_error when a
/// crossing is not found inside the grid.
double fwhm(const Volume<double>& env, const Peak& peak, int axis);
double fwhm(const Volume<double>& env, int axis);

// Axis-aligned ellipsoid around the main lobe.
struct PeakMask {
    Vec3 center{};
    Vec3 semi_axes{};

    bool contains(const Vec3& p) const;
    PeakMask dilated(double factor) const { return {center, {semi_axes[0] * factor, semi_axes[1] * factor, semi_axes[2] * factor}}; }
};

/// Ellipsoid centred on the peak with semi-axes equal to the per-axis FWHM.
PeakMask fwhm_mask(const Volume<double>& env);

/// Fraction of the total intensity (envelope squared) that lies inside `mask`.
double pir(const Volume<double>& env, const PeakMask& mask);

/// Value reported when nothing outside the exclusion zone is above zero.
inline constexpr double kPmslrCapDb = 120.0;

/// Peak over the largest value outside `mask` dilated by 2, in dB.
double pmslr_db(const Volume<double>& env, const PeakMask& mask);

enum class RoiRole { Tissue1, Tissue2, Tissue, Noise };

struct RoiBox {
    Vec3 center{};
    Vec3 half_extents{};
    RoiRole role = RoiRole::Tissue;
};

/// Mean envelope over voxels inside `roi`. The box must lie inside the grid
/// and contain at least one voxel.
double roi_mean(const Volume<double>& env, const RoiBox& roi);

/// 20 log10(mean(high scatter) / mean(tissue)).
double tcr_db(const Volume<double>& env, const RoiBox& tissue1, const RoiBox& tissue2);
/// 20 log10(mean(tissue) / mean(noise)).
double tnr_db(const Volume<double>& env, const RoiBox& tissue, const RoiBox& noise);

struct MeanWithError {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> values;
};

/// Splits `roi` into `splits` equal slabs along x and summarises their means.
MeanWithError subregion_stats(const Volume<double>& env, const RoiBox& roi, std::size_t splits);

/// 20 log10 ratio per matching sub-slab of `numerator` and `denominator`, summarised.
MeanWithError subregion_ratio_db(const Volume<double>& env, const RoiBox& numerator,
                                 const RoiBox& denominator, std::size_t splits);

struct MetricsReport {
    std::string method;
    std::string configuration;
    double depth = 0.0;
    std::optional<double> fwhm_x;
    std::optional<double> fwhm_y;
    std::optional<double> fwhm_z;
    std::optional<double> pir;
    std::optional<double> pmslr_db;
    std::optional<double> tcr_db;
    std::optional<double> tnr_db;
};

}  // namespace rcabf
