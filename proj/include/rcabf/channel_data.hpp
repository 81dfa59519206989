// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcabf/geometry.hpp"

namespace rcabf {

// Per-event, per-channel time series sharing one time axis t0 + k / fs.
// Events may carry different channel counts (rows and columns of a probe
// need not match), but every trace has the same number of samples.
template <typename T>
class ChannelData {
public:
    ChannelData() = default;

    ChannelData(std::vector<TransmitEvent> events, std::vector<std::size_t> channels,
                std::size_t samples, double t0, double fs)
        : events_(std::move(events)), channels_(std::move(channels)), samples_(samples), t0_(t0),
          fs_(fs)
    {
        if (events_.size() != channels_.size())
            throw std::invalid_argument("one channel count per event is required");
        if (!(fs_ > 0.0))
            throw std::invalid_argument("sampling frequency must be positive");
        offsets_.resize(events_.size() + 1, 0);
        for (std::size_t e = 0; e < events_.size(); ++e)
            offsets_[e + 1] = offsets_[e] + channels_[e] * samples_;
        data_.assign(offsets_.back(), T{});
    }

    std::size_t event_count() const { return events_.size(); }
    std::size_t channel_count(std::size_t e) const { return channels_.at(e); }
    std::size_t sample_count() const { return samples_; }
    double t0() const { return t0_; }
    double sampling_frequency() const { return fs_; }
    const TransmitEvent& event(std::size_t e) const { return events_.at(e); }
    const std::vector<TransmitEvent>& events() const { return events_; }
    const std::vector<std::size_t>& channel_counts() const { return channels_; }

    double time_of(std::size_t k) const { return t0_ + static_cast<double>(k) / fs_; }

    std::span<T> trace(std::size_t e, std::size_t n)
    {
        return {data_.data() + offsets_[e] + n * samples_, samples_};
    }
    std::span<const T> trace(std::size_t e, std::size_t n) const
    {
        return {data_.data() + offsets_[e] + n * samples_, samples_};
    }

    // All traces of event e, channel-major.
    std::span<T> event_block(std::size_t e)
    {
        return {data_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
    }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

private:
    std::vector<TransmitEvent> events_;
    std::vector<std::size_t> channels_;
    std::vector<std::size_t> offsets_;
    std::size_t samples_ = 0;
    double t0_ = 0.0;
    double fs_ = 1.0;
    std::vector<T> data_;
};

}  // namespace rcabf
