#pragma once

#include <string>
#include <vector>

namespace screamloc {

/// Mono waveform plus its sample rate. Samples are dimensionless amplitudes,
/// nominally in [-1, 1], and must stay finite.
struct AudioClip {
    std::vector<double> samples;
    int sample_rate_hz = 0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }

    /// Throws on non-positive rate or non-finite samples.
    void validate() const;
};

/// Synchronized bundle of per-microphone channels. Channel order matches
/// channel_ids, which align 1:1 with microphone ids.
struct MultichannelRecording {
    std::vector<AudioClip> channels;
    std::vector<std::string> channel_ids;

    std::size_t size() const { return channels.size(); }
    void validate() const; // shared rate, equal lengths, unique ids
    const AudioClip& channel_by_id(const std::string& id) const;
};

} // namespace screamloc
