#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "screamloc/audio.hpp"
#include "screamloc/geometry.hpp"
#include "screamloc/tdoa.hpp"

namespace screamloc {

struct SourceSpec {
    enum class Kind { white_noise, harmonic_burst, chirp };
    Kind kind = Kind::harmonic_burst;
    // harmonic_burst
    double fundamental_hz = 700.0;
    int harmonics = 3;
    double attack_s = 0.05;
    double decay_s = 1.0;
    // chirp
    double chirp_start_hz = 500.0;
    double chirp_end_hz = 2000.0;
};

struct Echo {
    double delay_s = 0.0;
    double gain = 0.0; // in [0, 1)
};

/// Fully specified synthetic acoustic setup with exact ground truth.
struct Scene {
    MicArray array;
    Vec3 source_pos;
    SourceSpec source;
    std::optional<double> snr_db; // per-channel, vs the clean delayed signal
    std::optional<Echo> echo;
    double c = 343.0;
    int sample_rate_hz = 16000;
    double duration_s = 10.0;
    std::uint64_t seed = 0;
};

struct GroundTruth {
    Vec3 source_pos;
    std::vector<TdoaMeasurement> tdoas; // exact (d_i - d_j)/c per pair, weight 1
};

/// Deterministic given the seed; peak-normalized to 0.9.
AudioClip synth_source(const SourceSpec& spec, double duration_s, int sample_rate_hz,
                       std::uint64_t seed);

/// Free-field propagation: exact fractional delay per mic via frequency-domain
/// phase shift, 1/r amplitude with a 1 m reference, optional single echo, and
/// per-channel white Gaussian noise at the requested SNR.
std::pair<MultichannelRecording, GroundTruth> simulate(const Scene& scene);

/// Exact pairwise values (d_i - d_j)/c, same sign convention as pick_tdoa.
std::vector<TdoaMeasurement> ground_truth_tdoas(const Scene& scene);

Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

/// Persists mic_<id>.wav per channel plus truth.json into out_dir.
void save_simulation(const Scene& scene, const MultichannelRecording& rec,
                     const GroundTruth& truth, const std::string& out_dir);

} // namespace screamloc
