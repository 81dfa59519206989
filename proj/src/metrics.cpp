// SPDX-License-Identifier: Apache-2.0

#include "rcabf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rcabf {

Peak find_peak(const Volume<double>& env)
{
    const auto values = env.data();
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    if (values.empty() || !(values[best] > 0.0))
        throw std::invalid_argument("peak of an all-zero volume is undefined");

    const auto& g = env.grid();
    Peak p;
    p.linear = best;
    p.index = {best % g.dims[0], (best / g.dims[0]) % g.dims[1], best / (g.dims[0] * g.dims[1])};
    p.position = g.position(p.index[0], p.index[1], p.index[2]);
    p.value = values[best];
    return p;
}

double fwhm(const Volume<double>& env, const Peak& peak, int axis)
{
    const auto& g = env.grid();
    const double half = 0.5 * peak.value;
    auto value_at = [&](std::size_t i) {
        auto idx = peak.index;
        idx[axis] = i;
        return env(idx[0], idx[1], idx[2]);
    };

    // Walk outwards until the profile drops below half maximum.
    const std::size_t p = peak.index[axis];
    const std::size_t n = g.dims[axis];
    double left = 0.0;
    bool found = false;
    for (std::size_t i = p; i > 0; --i) {
        const double inner = value_at(i);
        const double outer = value_at(i - 1);
        if (outer < half) {
            left = static_cast<double>(i) - (inner - half) / (inner - outer);
            found = true;
            break;
        }
    }
    if (!found)
        throw std::domain_error("half maximum not reached below the peak on axis " +
                                std::to_string(axis));

    double right = 0.0;
    found = false;
    for (std::size_t i = p; i + 1 < n; ++i) {
        const double inner = value_at(i);
        const double outer = value_at(i + 1);
        if (outer < half) {
            right = static_cast<double>(i) + (inner - half) / (inner - outer);
            found = true;
            break;
        }
    }
    if (!found)
        throw std::domain_error("half maximum not reached above the peak on axis " +
                                std::to_string(axis));
    return (right - left) * g.spacing[axis];
}

double fwhm(const Volume<double>& env, int axis)
{
    return fwhm(env, find_peak(env), axis);
}

bool PeakMask::contains(const Vec3& p) const
{
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double d = (p[a] - center[a]) / semi_axes[a];
        r2 += d * d;
    }
    return r2 <= 1.0;
}

PeakMask fwhm_mask(const Volume<double>& env)
{
    const Peak peak = find_peak(env);
    return {peak.position, {fwhm(env, peak, 0), fwhm(env, peak, 1), fwhm(env, peak, 2)}};
}

namespace {

template <typename Fn>
void for_each_voxel(const VoxelGrid& g, Fn&& fn)
{
    std::size_t i = 0;
    for (std::size_t iz = 0; iz < g.dims[2]; ++iz)
        for (std::size_t iy = 0; iy < g.dims[1]; ++iy)
            for (std::size_t ix = 0; ix < g.dims[0]; ++ix, ++i)
                fn(i, g.position(ix, iy, iz));
}

}  // namespace

double pir(const Volume<double>& env, const PeakMask& mask)
{
    double inside = 0.0;
    double total = 0.0;
    for_each_voxel(env.grid(), [&](std::size_t i, const Vec3& p) {
        const double intensity = env[i] * env[i];
        total += intensity;
        if (mask.contains(p))
            inside += intensity;
    });
    if (!(total > 0.0))
        throw std::invalid_argument("PIR of a zero-intensity volume is undefined");
    return inside / total;
}

double pmslr_db(const Volume<double>& env, const PeakMask& mask)
{
    const PeakMask exclusion = mask.dilated(2.0);
    double peak = 0.0;
    double side = 0.0;
    std::size_t exterior = 0;
    for_each_voxel(env.grid(), [&](std::size_t i, const Vec3& p) {
        if (mask.contains(p))
            peak = std::max(peak, env[i]);
        if (!exclusion.contains(p)) {
            side = std::max(side, env[i]);
            ++exterior;
        }
    });
    if (exterior == 0)
        throw std::invalid_argument("side-lobe exclusion zone covers the whole grid");
    if (!(peak > 0.0))
        throw std::invalid_argument("main lobe is empty");
    if (side == 0.0)
        return kPmslrCapDb;
    return std::min(kPmslrCapDb, 20.0 * std::log10(peak / side));
}

namespace {

void check_inside(const VoxelGrid& g, const RoiBox& roi)
{
    constexpr double kSlack = 1e-9;
    for (int a = 0; a < 3; ++a) {
        const double lo = g.lo(a) - 0.5 * g.spacing[a];
        const double hi = g.hi(a) + 0.5 * g.spacing[a];
        if (roi.center[a] - roi.half_extents[a] < lo - kSlack ||
            roi.center[a] + roi.half_extents[a] > hi + kSlack)
            throw std::invalid_argument("region of interest extends outside the grid");
    }
}

using IndexRange = std::array<std::array<std::size_t, 2>, 3>;

// Voxels whose centres fall inside the box; zero voxels is an error.
IndexRange voxel_range(const VoxelGrid& g, const Vec3& lo, const Vec3& hi)
{
    IndexRange r{};
    for (int a = 0; a < 3; ++a) {
        const double f = std::ceil((lo[a] - g.origin[a]) / g.spacing[a] - 1e-9);
        const double l = std::floor((hi[a] - g.origin[a]) / g.spacing[a] + 1e-9);
        if (l < f || l < 0.0 || f > static_cast<double>(g.dims[a] - 1))
            throw std::invalid_argument("region of interest contains no voxels");
        r[a][0] = static_cast<std::size_t>(std::max(0.0, f));
        r[a][1] = std::min(g.dims[a] - 1, static_cast<std::size_t>(l));
    }
    return r;
}

double box_mean(const Volume<double>& env, const Vec3& lo, const Vec3& hi)
{
    const IndexRange r = voxel_range(env.grid(), lo, hi);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t iz = r[2][0]; iz <= r[2][1]; ++iz)
        for (std::size_t iy = r[1][0]; iy <= r[1][1]; ++iy)
            for (std::size_t ix = r[0][0]; ix <= r[0][1]; ++ix, ++count)
                sum += env(ix, iy, iz);
    return sum / static_cast<double>(count);
}

Vec3 box_lo(const RoiBox& r)
{
    return {r.center[0] - r.half_extents[0], r.center[1] - r.half_extents[1],
            r.center[2] - r.half_extents[2]};
}

Vec3 box_hi(const RoiBox& r)
{
    return {r.center[0] + r.half_extents[0], r.center[1] + r.half_extents[1],
            r.center[2] + r.half_extents[2]};
}

double ratio_db(double num, double den)
{
    if (!(den > 0.0))
        throw std::invalid_argument("reference region has zero mean");
    return 20.0 * std::log10(num / den);
}

std::vector<double> slab_means(const Volume<double>& env, const RoiBox& roi, std::size_t splits)
{
    if (splits < 1)
        throw std::invalid_argument("need at least one subregion");
    check_inside(env.grid(), roi);
    const auto& g = env.grid();
    const Vec3 lo = box_lo(roi);
    const IndexRange r = voxel_range(g, lo, box_hi(roi));
    const double width = 2.0 * roi.half_extents[0] / static_cast<double>(splits);

    std::vector<double> sums(splits, 0.0);
    std::vector<std::size_t> counts(splits, 0);
    for (std::size_t ix = r[0][0]; ix <= r[0][1]; ++ix) {
        // A voxel centred on a slab boundary belongs to the left slab.
        const double pos = (g.coord(0, ix) - lo[0]) / width;
        const double slab = std::ceil(pos - 1e-6) - 1.0;
        const auto s = static_cast<std::size_t>(
            std::clamp(slab, 0.0, static_cast<double>(splits - 1)));
        for (std::size_t iz = r[2][0]; iz <= r[2][1]; ++iz)
            for (std::size_t iy = r[1][0]; iy <= r[1][1]; ++iy) {
                sums[s] += env(ix, iy, iz);
                ++counts[s];
            }
    }
    std::vector<double> means(splits);
    for (std::size_t s = 0; s < splits; ++s) {
        if (counts[s] == 0)
            throw std::invalid_argument("subregion contains no voxels");
        means[s] = sums[s] / static_cast<double>(counts[s]);
    }
    return means;
}

MeanWithError summarise(std::vector<double> values)
{
    MeanWithError out;
    const auto k = static_cast<double>(values.size());
    for (double v : values)
        out.mean += v;
    out.mean /= k;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - out.mean) * (v - out.mean);
        out.std_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    out.values = std::move(values);
    return out;
}

}  // namespace

double roi_mean(const Volume<double>& env, const RoiBox& roi)
{
    check_inside(env.grid(), roi);
    return box_mean(env, box_lo(roi), box_hi(roi));
}

double tcr_db(const Volume<double>& env, const RoiBox& tissue1, const RoiBox& tissue2)
{
    return ratio_db(roi_mean(env, tissue1), roi_mean(env, tissue2));
}

double tnr_db(const Volume<double>& env, const RoiBox& tissue, const RoiBox& noise)
{
    return ratio_db(roi_mean(env, tissue), roi_mean(env, noise));
}

MeanWithError subregion_stats(const Volume<double>& env, const RoiBox& roi, std::size_t splits)
{
    return summarise(slab_means(env, roi, splits));
}

MeanWithError subregion_ratio_db(const Volume<double>& env, const RoiBox& numerator,
                                 const RoiBox& denominator, std::size_t splits)
{
    const auto num = slab_means(env, numerator, splits);
    const auto den = slab_means(env, denominator, splits);
    std::vector<double> ratios;
    for (std::size_t s = 0; s < splits; ++s)
        ratios.push_back(ratio_db(num[s], den[s]));
    return summarise(std::move(ratios));
}

}  // namespace rcabf
