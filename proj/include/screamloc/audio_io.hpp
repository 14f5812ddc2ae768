#pragma once

#include <string>
#include <vector>

#include "screamloc/audio.hpp"

namespace screamloc {

/// Reads a mono RIFF/WAVE file. Accepts PCM 16-bit (format code 1) and IEEE
/// float-32 (code 3); everything else is rejected. Integer samples are scaled
/// by 1/32768.
AudioClip load_wav(const std::string& path);

/// Writes a mono PCM16 WAV. Samples are clamped to [-1, 1] before quantization.
void save_wav(const std::string& path, const AudioClip& clip);

/// Windowed-sinc resampling (64-tap Kaiser, beta = 8.6). Identity when the
/// rates already match. Output length is round(n * target / source).
AudioClip resample(const AudioClip& clip, int target_hz);

/// Pads with trailing zeros or truncates at the end so the clip lasts exactly
/// `seconds` (rounded to whole samples).
AudioClip fix_duration(const AudioClip& clip, double seconds);

/// Splits into windows starting at 0, hop, 2*hop, ... The final partial window
/// is zero-padded to full length. Always returns at least one window.
std::vector<AudioClip> segment_stream(const AudioClip& clip, double window_s, double hop_s);

} // namespace screamloc
