// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "rcabf/channel_data.hpp"
#include "rcabf/synth.hpp"

namespace rcabf {

// Complex baseband channel data. Keeps the carrier used for mixing so the
// beamformer can undo the carrier phase at the same frequency.
struct IqDataSet : ChannelData<std::complex<double>> {
    using ChannelData::ChannelData;
    double carrier = 0.0;
};

/// Linear-phase Kaiser-windowed sinc, odd length, unit DC gain.
/// `transition_width` is the full width (Hz) of the band centred on `cutoff`
/// in which the response falls from passband to a stopband of at most
/// -stopband_db.
std::vector<double> design_lowpass(double cutoff, double fs, double transition_width,
                                   double stopband_db = 60.0);

struct IqOptions {
    double carrier = 5.0e6;
    double cutoff = 3.0e6;
    std::size_t decimation = 2;
    double transition_width = 2.0e6;
    unsigned workers = 0;

    static IqOptions from_probe(const ProbeGeometry& geom);
};

/// Mixes every trace with exp(-i 2 pi f_c t) on absolute time t = t0 + k / fs,
/// low-pass filters it with a zero-phase FIR and keeps every decimation-th sample.
IqDataSet iq_demodulate(const RfDataSet& rf, const IqOptions& options);

/// Linear interpolation of trace (event, channel) at absolute time `delay`.
/// Times outside the recorded window return zero.
std::complex<double> sample_at(const IqDataSet& iq, std::size_t event, std::size_t channel,
                               double delay);

}  // namespace rcabf
