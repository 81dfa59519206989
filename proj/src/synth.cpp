// SPDX-License-Identifier: Apache-2.0

#include "rcabf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rcabf/parallel.hpp"

namespace rcabf {

namespace {

// -6 dB full width of a Gaussian spectrum is 2 sqrt(2 ln 2) sigma_f.
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

}  // namespace

const char* to_string(RegionRole role)
{
    switch (role) {
    case RegionRole::HighScatter:
        return "high_scatter";
    case RegionRole::Anechoic:
        return "anechoic";
    case RegionRole::Background:
        return "background";
    }
    return "unknown";
}

bool LabeledRegion::contains(const Vec3& p) const
{
    if (const auto* t = std::get_if<Tube>(&shape)) {
        const double dx = p[0] - t->x;
        const double dz = p[2] - t->z;
        return dx * dx + dz * dz <= t->radius * t->radius;
    }
    const auto& b = std::get<Box>(shape);
    for (int a = 0; a < 3; ++a)
        if (p[a] < b.lo[a] || p[a] > b.hi[a])
            return false;
    return true;
}

double PulseModel::envelope_sigma() const
{
    const double sigma_f = bandwidth / kFwhmPerSigma;
    return 1.0 / (2.0 * std::numbers::pi * sigma_f);
}

double PulseModel::effective_duration() const
{
    return duration > 0.0 ? duration : 8.0 * envelope_sigma();
}

void PulseModel::validate() const
{
    if (!(center_frequency > 0.0) || !(bandwidth > 0.0))
        throw std::invalid_argument("pulse frequencies must be positive");
    // Envelope energy exp(-t^2 / sigma^2) has 99 % inside |t| <= 2.5758 sigma / sqrt(2).
    const double needed = 2.0 * 2.5758293035489 / std::numbers::sqrt2 * envelope_sigma();
    if (duration != 0.0 && duration < needed)
        throw std::invalid_argument("pulse duration keeps less than 99 % of the envelope energy");
}

PulseModel PulseModel::from_probe(const ProbeGeometry& geom)
{
    PulseModel p;
    p.center_frequency = geom.center_frequency;
    p.bandwidth = geom.bandwidth;
    return p;
}

SampledPulse make_pulse(const PulseModel& model, double fs)
{
    model.validate();
    if (!(fs > 2.0 * (model.center_frequency + 0.5 * model.bandwidth)))
        throw std::invalid_argument("sampling frequency " + std::to_string(fs) +
                                    " Hz undersamples the pulse");
    const double sigma = model.envelope_sigma();
    const auto half = static_cast<std::size_t>(std::floor(0.5 * model.effective_duration() * fs));
    SampledPulse p;
    p.sampling_frequency = fs;
    p.center = half;
    p.samples.resize(2 * half + 1);
    const double w = 2.0 * std::numbers::pi * model.center_frequency;
    for (std::size_t k = 0; k < p.samples.size(); ++k) {
        const double t = (static_cast<double>(k) - static_cast<double>(half)) / fs;
        p.samples[k] =
            model.amplitude * std::exp(-0.5 * t * t / (sigma * sigma)) * std::cos(w * t);
    }
    return p;
}

TimeWindow acquisition_window(const ProbeGeometry& geom, const TransmitSchedule& schedule,
                              const VoxelGrid& grid, const PulseModel& pulse, double margin)
{
    geom.validate();
    grid.validate();
    const double c = geom.sound_speed;
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -t_min;
    const double z_lo = grid.lo(2);
    const double z_hi = grid.hi(2);
    for (const auto& ev : schedule.events) {
        const int a = steering_axis(ev.orientation);
        const int b = receive_axis(ev.orientation);
        const double cs = std::cos(ev.steer_angle);
        const double sn = std::sin(ev.steer_angle);
        // The transmit delay is linear in (u, z): extremes sit on the corners.
        for (double u : {grid.lo(a), grid.hi(a)})
            for (double z : {z_lo, z_hi}) {
                const double tx = (z * cs + u * sn) / c;
                t_min = std::min(t_min, tx + z_lo / c);
                const double r_far = 0.5 * geom.aperture_span(receive_set(ev.orientation));
                const double v_far = std::max(std::abs(grid.lo(b)), std::abs(grid.hi(b)));
                const double rx_max = std::hypot(z_hi, v_far + r_far) / c;
                t_max = std::max(t_max, tx + rx_max);
            }
    }
    const double half_pulse = 0.5 * pulse.effective_duration();
    TimeWindow w;
    w.t_start = std::max(0.0, t_min - half_pulse - margin);
    const double t_end = t_max + half_pulse + margin;
    w.n_samples = static_cast<std::size_t>(std::ceil((t_end - w.t_start) * geom.sampling_frequency)) + 1;
    return w;
}

RfDataSet simulate_rf(const ProbeGeometry& geom, const Phantom& phantom,
                      const TransmitSchedule& schedule, const PulseModel& pulse,
                      const SynthesisOptions& options)
{
    geom.validate();
    if (schedule.events.empty())
        throw std::invalid_argument("transmit schedule is empty");
    if (options.window.n_samples == 0)
        throw std::invalid_argument("acquisition window has no samples");
    if (options.pulse_oversampling < 1)
        throw std::invalid_argument("pulse oversampling must be at least 1");
    for (const auto& s : phantom.scatterers)
        if (!(s.position[2] > 0.0))
            throw std::invalid_argument("scatterers must lie at positive depth");

    const double fs = geom.sampling_frequency;
    const double c = geom.sound_speed;
    const std::size_t oversampling = options.pulse_oversampling;
    const SampledPulse lut = make_pulse(pulse, fs * static_cast<double>(oversampling));
    const double lut_center = static_cast<double>(lut.center);
    const double half_support = lut_center / static_cast<double>(oversampling);  // RF samples

    // Polyphase layout: row p holds lut[p + oversampling * j]. Row `oversampling`
    // is row 0 advanced by one tap, so row p + 1 always gives the upper neighbour.
    const std::size_t row_length = lut.samples.size() / oversampling + 2;
    std::vector<double> poly((oversampling + 1) * row_length, 0.0);
    for (std::size_t p = 0; p <= oversampling; ++p)
        for (std::size_t j = 0; j < row_length; ++j)
            if (const std::size_t i = p + oversampling * j; i < lut.samples.size())
                poly[p * row_length + j] = lut.samples[i];

    std::vector<std::size_t> channels;
    for (const auto& ev : schedule.events)
        channels.push_back(geom.element_count(receive_set(ev.orientation)));
    RfDataSet rf(schedule.events, channels, options.window.n_samples, options.window.t_start, fs);
    const auto n_samples = static_cast<std::ptrdiff_t>(rf.sample_count());
    const double t0 = rf.t0();

    // Visiting scatterers in depth order keeps trace writes local in time.
    std::vector<std::size_t> order(phantom.scatterers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return phantom.scatterers[i].position[2] < phantom.scatterers[j].position[2];
    });

    parallel_for(schedule.size(), options.workers, [&](std::size_t e) {
        const TransmitEvent& ev = schedule.events[e];
        const int a = steering_axis(ev.orientation);
        const int b = receive_axis(ev.orientation);
        const ElementSet tx_set = transmit_set(ev.orientation);
        const auto rx_pos = element_positions(geom, receive_set(ev.orientation));
        const double tx_span = geom.aperture_span(tx_set);
        const double strip_length = geom.element_length(tx_set);
        const double cs = std::cos(ev.steer_angle);
        const double sn = std::sin(ev.steer_angle);
        const double tn = std::tan(ev.steer_angle);

        for (std::size_t si : order) {
            const Scatterer& s = phantom.scatterers[si];
            const double u = s.position[a];
            const double v = s.position[b];
            const double z = s.position[2];

            // Back-project along the propagation direction onto the firing aperture.
            const double u_src = u - z * tn;
            double w_tx = 0.0;
            if (tx_span > 0.0)
                w_tx = tukey_weight((u_src + 0.5 * tx_span) / tx_span, options.tx_apod_alpha);
            else
                w_tx = std::abs(u_src) <= 0.5 * geom.pitch ? 1.0 : 0.0;
            // The firing strips only extend over the orthogonal aperture.
            if (std::abs(v) > 0.5 * strip_length)
                w_tx = 0.0;
            const double weight = s.amplitude * w_tx;
            if (weight == 0.0)
                continue;

            const double d_tx = (z * cs + u * sn) / c;
            for (std::size_t n = 0; n < rx_pos.size(); ++n) {
                const double dv = v - rx_pos[n];
                const double r = std::sqrt(z * z + dv * dv);
                const double tau = d_tx + r / c;
                const double gain = weight / r;

                const double x = (tau - t0) * fs;  // echo centre in fractional samples
                auto k_lo = static_cast<std::ptrdiff_t>(std::ceil(x - half_support));
                auto k_hi = static_cast<std::ptrdiff_t>(std::floor(x + half_support));
                k_lo = std::max<std::ptrdiff_t>(k_lo, 0);
                k_hi = std::min<std::ptrdiff_t>(k_hi, n_samples - 1);
                if (k_lo > k_hi)
                    continue;

                // Oversampling is integral, so every output sample shares one
                // interpolation fraction: phase rows p and p + 1 of the table.
                const double q0 = lut_center + (static_cast<double>(k_lo) - x) *
                                                   static_cast<double>(oversampling);
                const double q0_floor = std::floor(q0);
                const double frac = q0 - q0_floor;
                auto idx = static_cast<std::ptrdiff_t>(q0_floor);
                for (; idx < 0 && k_lo <= k_hi; idx += static_cast<std::ptrdiff_t>(oversampling))
                    ++k_lo;
                if (k_lo > k_hi)
                    continue;
                const auto phase = static_cast<std::size_t>(idx) % oversampling;
                const auto j0 = static_cast<std::size_t>(idx) / oversampling;
                const auto count = std::min<std::size_t>(static_cast<std::size_t>(k_hi - k_lo + 1),
                                                         row_length - j0);
                const double* lo_row = poly.data() + phase * row_length + j0;
                const double* hi_row = lo_row + row_length;
                double* out = rf.trace(e, n).data() + k_lo;
                for (std::size_t m = 0; m < count; ++m)
                    out[m] += gain * (lo_row[m] + frac * (hi_row[m] - lo_row[m]));
            }
        }
    });
    return rf;
}

std::mt19937_64 make_stream(std::uint64_t seed, RandomStream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

RfDataSet add_noise(const RfDataSet& rf, double snr_db, std::uint64_t seed)
{
    const auto samples = rf.data();
    double power = 0.0;
    for (double v : samples)
        power += v * v;
    if (samples.empty() || power == 0.0)
        throw std::invalid_argument("SNR is undefined for an all-zero record");
    power /= static_cast<double>(samples.size());

    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    RfDataSet out = rf;
    auto rng = make_stream(seed, RandomStream::Noise);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : out.data())
        v += noise(rng);
    return out;
}

Phantom make_point_phantom(const std::vector<double>& depths)
{
    Phantom p;
    for (double d : depths) {
        if (!(d > 0.0))
            throw std::invalid_argument("point target depth must be positive");
        p.scatterers.push_back({{0.0, 0.0, d}, 1.0});
    }
    return p;
}

double resolution_cell_volume(const ProbeGeometry& geom, double depth)
{
    const double lambda = geom.wavelength();
    const double dx = lambda * depth / (static_cast<double>(geom.num_rows) * geom.pitch);
    const double dy = lambda * depth / (static_cast<double>(geom.num_cols) * geom.pitch);
    const double dz = geom.sound_speed / (2.0 * geom.bandwidth);
    return dx * dy * dz;
}

namespace {

struct Segment {
    double lo;
    double hi;
};

// Depth intervals scatterers are drawn from, merged and sorted.
std::vector<Segment> depth_segments(const CystPhantomSpec& spec)
{
    if (spec.band_half_height <= 0.0)
        return {{spec.lo[2], spec.hi[2]}};
    std::vector<Segment> segs;
    for (double d : spec.depths) {
        const double lo = std::max(spec.lo[2], d - spec.band_half_height);
        const double hi = std::min(spec.hi[2], d + spec.band_half_height);
        if (hi > lo)
            segs.push_back({lo, hi});
    }
    std::sort(segs.begin(), segs.end(), [](auto& l, auto& r) { return l.lo < r.lo; });
    std::vector<Segment> merged;
    for (const auto& s : segs) {
        if (!merged.empty() && s.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }
    return merged;
}

}  // namespace

Phantom make_cyst_phantom(const CystPhantomSpec& spec, std::uint64_t seed)
{
    if (spec.density < 5.0)
        throw std::invalid_argument("speckle needs at least 5 scatterers per resolution cell");
    if (!(spec.resolution_cell > 0.0))
        throw std::invalid_argument("resolution cell volume must be positive");
    if (!(spec.radius > 0.0))
        throw std::invalid_argument("tube radius must be positive");
    for (int a = 0; a < 3; ++a)
        if (!(spec.hi[a] > spec.lo[a]))
            throw std::invalid_argument("phantom box is empty");
    if (!(spec.lo[2] > 0.0))
        throw std::invalid_argument("phantom must lie at positive depth");

    Phantom p;
    p.regions.push_back({Box{spec.lo, spec.hi}, RegionRole::Background});
    std::vector<Tube> tubes;
    for (double d : spec.depths) {
        tubes.push_back({spec.anechoic_x, d, spec.radius});
        p.regions.push_back({tubes.back(), RegionRole::Anechoic});
        tubes.push_back({spec.high_scatter_x, d, spec.radius});
        p.regions.push_back({tubes.back(), RegionRole::HighScatter});
    }
    for (std::size_t i = 0; i < tubes.size(); ++i)
        for (std::size_t j = i + 1; j < tubes.size(); ++j) {
            const double dist = std::hypot(tubes[i].x - tubes[j].x, tubes[i].z - tubes[j].z);
            if (dist < tubes[i].radius + tubes[j].radius)
                throw std::invalid_argument("phantom tubes overlap");
        }

    const auto segs = depth_segments(spec);
    double depth_len = 0.0;
    for (const auto& s : segs)
        depth_len += s.hi - s.lo;
    const double volume = (spec.hi[0] - spec.lo[0]) * (spec.hi[1] - spec.lo[1]) * depth_len;
    p.drawn = static_cast<std::size_t>(std::llround(spec.density * volume / spec.resolution_cell));

    auto rng = make_stream(seed, RandomStream::Phantom);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> reflectivity(0.0, 1.0);
    p.scatterers.reserve(p.drawn);
    for (std::size_t i = 0; i < p.drawn; ++i) {
        const double x = spec.lo[0] + unit(rng) * (spec.hi[0] - spec.lo[0]);
        const double y = spec.lo[1] + unit(rng) * (spec.hi[1] - spec.lo[1]);
        double along = unit(rng) * depth_len;
        double z = segs.back().hi;
        for (const auto& s : segs) {
            if (along <= s.hi - s.lo) {
                z = s.lo + along;
                break;
            }
            along -= s.hi - s.lo;
        }
        double amp = reflectivity(rng);
        const Vec3 pos{x, y, z};
        bool keep = true;
        for (const auto& r : p.regions) {
            if (r.role == RegionRole::Background || !r.contains(pos))
                continue;
            if (r.role == RegionRole::Anechoic)
                keep = false;
            else
                amp *= spec.high_scatter_gain;
        }
        if (keep)
            p.scatterers.push_back({pos, amp});
    }
    return p;
}

}  // namespace rcabf
