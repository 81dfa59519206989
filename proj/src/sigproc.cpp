// SPDX-License-Identifier: Apache-2.0

#include "rcabf/sigproc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rcabf/parallel.hpp"

namespace rcabf {

std::vector<double> design_lowpass(double cutoff, double fs, double transition_width,
                                   double stopband_db)
{
    if (!(fs > 0.0) || !(cutoff > 0.0) || !(cutoff < 0.5 * fs))
        throw std::invalid_argument("low-pass cutoff must lie in (0, fs/2)");
    if (!(transition_width > 0.0) || cutoff + 0.5 * transition_width > 0.5 * fs ||
        cutoff - 0.5 * transition_width <= 0.0)
        throw std::invalid_argument("low-pass transition band does not fit in (0, fs/2)");
    if (!(stopband_db > 21.0))
        throw std::invalid_argument("Kaiser design needs more than 21 dB of attenuation");

    // Kaiser's empirical formulas for beta and order.
    const double beta = stopband_db > 50.0 ? 0.1102 * (stopband_db - 8.7)
                                           : 0.5842 * std::pow(stopband_db - 21.0, 0.4) +
                                                 0.07886 * (stopband_db - 21.0);
    const double d_omega = 2.0 * std::numbers::pi * transition_width / fs;
    auto order = static_cast<std::size_t>(std::ceil((stopband_db - 7.95) / (2.285 * d_omega)));
    if (order % 2 == 1)
        ++order;
    const std::size_t length = order + 1;

    const double fc = cutoff / fs;
    const double mid = 0.5 * static_cast<double>(order);
    const double i0_beta = std::cyl_bessel_i(0.0, beta);
    std::vector<double> taps(length);
    double sum = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
        const double m = static_cast<double>(k) - mid;
        const double sinc = m == 0.0 ? 2.0 * fc
                                     : std::sin(2.0 * std::numbers::pi * fc * m) /
                                           (std::numbers::pi * m);
        const double r = m / mid;
        const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                              i0_beta;
        taps[k] = sinc * window;
        sum += taps[k];
    }
    for (double& t : taps)
        t /= sum;
    // Enforce exact symmetry.
    for (std::size_t k = 0; k < length / 2; ++k)
        taps[length - 1 - k] = taps[k];
    return taps;
}

IqOptions IqOptions::from_probe(const ProbeGeometry& geom)
{
    IqOptions o;
    o.carrier = geom.center_frequency;
    o.cutoff = 0.5 * geom.bandwidth;
    return o;
}

IqDataSet iq_demodulate(const RfDataSet& rf, const IqOptions& options)
{
    const double fs = rf.sampling_frequency();
    if (options.decimation < 1)
        throw std::invalid_argument("decimation factor must be at least 1");
    if (!(options.cutoff <= fs / (2.0 * static_cast<double>(options.decimation))))
        throw std::invalid_argument("low-pass cutoff exceeds the decimated Nyquist frequency");

    const auto taps = design_lowpass(options.cutoff, fs, options.transition_width);
    const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
    const std::size_t n_in = rf.sample_count();
    const std::size_t dec = options.decimation;
    const std::size_t n_out = n_in == 0 ? 0 : (n_in - 1) / dec + 1;

    IqDataSet iq(rf.events(), rf.channel_counts(), n_out, rf.t0(), fs / static_cast<double>(dec));
    iq.carrier = options.carrier;

    std::vector<std::complex<double>> mixer(n_in);
    const double w = 2.0 * std::numbers::pi * options.carrier;
    for (std::size_t k = 0; k < n_in; ++k)
        mixer[k] = std::polar(1.0, -w * rf.time_of(k));

    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t e = 0; e < rf.event_count(); ++e)
        for (std::size_t n = 0; n < rf.channel_count(e); ++n)
            jobs.emplace_back(e, n);

    parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
        const auto [e, n] = jobs[j];
        const auto in = rf.trace(e, n);
        auto out = iq.trace(e, n);
        std::vector<std::complex<double>> mixed(n_in);
        for (std::size_t k = 0; k < n_in; ++k)
            mixed[k] = in[k] * mixer[k];
        const auto last = static_cast<std::ptrdiff_t>(n_in) - 1;
        for (std::size_t m = 0; m < n_out; ++m) {
            const auto centre = static_cast<std::ptrdiff_t>(m * dec);
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, centre - half);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(last, centre + half);
            std::complex<double> acc{};
            for (std::ptrdiff_t k = lo; k <= hi; ++k)
                acc += taps[static_cast<std::size_t>(k - centre + half)] * mixed[k];
            out[m] = acc;
        }
    });
    return iq;
}

std::complex<double> sample_at(const IqDataSet& iq, std::size_t event, std::size_t channel,
                               double delay)
{
    const double pos = (delay - iq.t0()) * iq.sampling_frequency();
    const auto trace = iq.trace(event, channel);
    const double last = static_cast<double>(trace.size()) - 1.0;
    if (!(pos >= 0.0) || pos > last)
        return {};
    const double base = std::floor(pos);
    const auto i = static_cast<std::size_t>(base);
    const double frac = pos - base;
    if (frac == 0.0)
        return trace[i];
    return trace[i] + frac * (trace[i + 1] - trace[i]);
}

}  // namespace rcabf
