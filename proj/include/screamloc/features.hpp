#pragma once

#include <complex>
#include <string>
#include <vector>

#include "screamloc/audio.hpp"

namespace screamloc {

/// One-sided short-time spectrum, frames x (n_fft/2 + 1), row-major.
/// Forward transform is unnormalized; frames are Hann-windowed, no padding.
struct Spectrogram {
    std::vector<std::complex<double>> bins;
    int frames = 0;
    int n_bins = 0;
    int n_fft = 0;
    int hop = 0;
    int sample_rate_hz = 0;

    const std::complex<double>& at(int frame, int bin) const {
        return bins[static_cast<std::size_t>(frame) * n_bins + bin];
    }
};

struct MfccConfig {
    int n_fft = 512;
    int hop = 256;
    int n_filters = 26;
    int n_mfcc = 13;
};

struct MfccMatrix {
    std::vector<double> coeffs; // frames x n_mfcc, row-major
    int frames = 0;
    int n_mfcc = 0;
    MfccConfig config;
    int sample_rate_hz = 0;

    double at(int frame, int n) const {
        return coeffs[static_cast<std::size_t>(frame) * n_mfcc + n];
    }
    std::string fingerprint() const;
};

using FeatureVector = std::vector<double>;

Spectrogram stft(const AudioClip& clip, int n_fft, int hop);

/// Triangular filters equally spaced on the HTK mel scale between 0 Hz and
/// sample_rate_hz/2, evaluated at the one-sided FFT bin frequencies.
/// Row-major n_filters x (n_fft/2 + 1).
std::vector<double> mel_filterbank(int n_filters, int n_fft, int sample_rate_hz);

/// log(filterbank . |X|^2 + 1e-10) followed by an orthonormal DCT-II over the
/// filter axis, keeping coefficients 0..n_mfcc-1.
MfccMatrix mfcc(const AudioClip& clip, const MfccConfig& config = {});

/// Per-coefficient mean followed by per-coefficient population standard
/// deviation across frames; length 2 * n_mfcc.
FeatureVector summarize(const MfccMatrix& m);

} // namespace screamloc
