// Test-only reference implementations, kept independent of the library's
// computation paths so they can serve as oracles.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "screamloc/audio.hpp"
#include "screamloc/geometry.hpp"
#include "screamloc/localizer.hpp"
#include "screamloc/tdoa.hpp"

namespace oracle {

// O(n^2) DFT straight from the definition.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            const double phi = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(m) /
                               static_cast<double>(n);
            acc += x[m] * std::complex<double>(std::cos(phi), std::sin(phi));
        }
        out[k] = acc;
    }
    return out;
}

// Straight-line MFCC recomputation: naive DFT, triangle filters evaluated
// inline, direct cosine-sum DCT. Mirrors only the published definitions.
inline std::vector<std::vector<double>> reference_mfcc(const screamloc::AudioClip& clip, int n_fft,
                                                       int hop, int n_filters, int n_mfcc) {
    const double sr = clip.sample_rate_hz;
    const auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
    const auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

    const int n_bins = n_fft / 2 + 1;
    const int frames = 1 + static_cast<int>((clip.samples.size() - n_fft) / hop);

    std::vector<std::vector<double>> result;
    for (int t = 0; t < frames; ++t) {
        std::vector<double> frame(n_fft);
        for (int i = 0; i < n_fft; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n_fft);
            frame[i] = clip.samples[static_cast<std::size_t>(t) * hop + i] * w;
        }
        const auto spectrum = naive_dft(frame);

        std::vector<double> logmel(n_filters);
        const double mel_top = mel(sr / 2.0);
        for (int f = 0; f < n_filters; ++f) {
            const double lo = hz(mel_top * f / (n_filters + 1));
            const double center = hz(mel_top * (f + 1) / (n_filters + 1));
            const double hi = hz(mel_top * (f + 2) / (n_filters + 1));
            double e = 0.0;
            for (int k = 0; k < n_bins; ++k) {
                const double freq = k * sr / n_fft;
                double w = 0.0;
                if (freq > lo && freq <= center)
                    w = (freq - lo) / (center - lo);
                else if (freq > center && freq < hi)
                    w = (hi - freq) / (hi - center);
                e += w * std::norm(spectrum[k]);
            }
            logmel[f] = std::log(e + 1e-10);
        }

        std::vector<double> coeffs(n_mfcc);
        for (int n = 0; n < n_mfcc; ++n) {
            double acc = 0.0;
            for (int f = 0; f < n_filters; ++f)
                acc += logmel[f] * std::cos(M_PI * n * (2 * f + 1) / (2.0 * n_filters));
            coeffs[n] = acc * std::sqrt((n == 0 ? 1.0 : 2.0) / n_filters);
        }
        result.push_back(std::move(coeffs));
    }
    return result;
}

// Brute-force EER: every distinct score tried as a threshold with O(n) counts
// per candidate, no sorting tricks shared with the library.
inline std::pair<double, double> brute_force_eer(const std::vector<double>& scores,
                                                 const std::vector<int>& labels) {
    std::vector<double> taus = scores;
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    double best_gap = std::numeric_limits<double>::infinity();
    double best_eer = 0.0, best_tau = 0.0;
    for (double tau : taus) {
        long long fp = 0, tn = 0, fn = 0, tp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool pred = scores[i] >= tau;
            if (labels[i] == 1)
                (pred ? tp : fn)++;
            else
                (pred ? fp : tn)++;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(fp + tn);
        const double fnr = static_cast<double>(fn) / static_cast<double>(fn + tp);
        if (std::abs(fpr - fnr) < best_gap) {
            best_gap = std::abs(fpr - fnr);
            best_eer = (fpr + fnr) / 2.0;
            best_tau = tau;
        }
    }
    return {best_eer, best_tau};
}

// Central finite differences of tdoa_loss.
inline screamloc::Vec3 fd_gradient(const screamloc::Vec3& pos,
                                   const std::vector<screamloc::TdoaMeasurement>& meas,
                                   const screamloc::MicArray& array, double c, double h = 1e-5) {
    using screamloc::tdoa_loss;
    screamloc::Vec3 g;
    g.x = (tdoa_loss({pos.x + h, pos.y, pos.z}, meas, array, c) -
           tdoa_loss({pos.x - h, pos.y, pos.z}, meas, array, c)) /
          (2 * h);
    g.y = (tdoa_loss({pos.x, pos.y + h, pos.z}, meas, array, c) -
           tdoa_loss({pos.x, pos.y - h, pos.z}, meas, array, c)) /
          (2 * h);
    g.z = (tdoa_loss({pos.x, pos.y, pos.z + h}, meas, array, c) -
           tdoa_loss({pos.x, pos.y, pos.z - h}, meas, array, c)) /
          (2 * h);
    return g;
}

// Peak one-sided STFT bin of a clip, averaged over frames, via the naive DFT.
inline int dominant_bin(const screamloc::AudioClip& clip, int n_fft) {
    const int frames = 1 + static_cast<int>((clip.samples.size() - n_fft) / (n_fft / 2));
    std::vector<double> mag(n_fft / 2 + 1, 0.0);
    for (int t = 0; t < frames; ++t) {
        std::vector<double> frame(n_fft);
        for (int i = 0; i < n_fft; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n_fft);
            frame[i] = clip.samples[static_cast<std::size_t>(t) * (n_fft / 2) + i] * w;
        }
        const auto spec = naive_dft(frame);
        for (std::size_t k = 0; k < mag.size(); ++k) mag[k] += std::abs(spec[k]);
    }
    return static_cast<int>(std::max_element(mag.begin(), mag.end()) - mag.begin());
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * ((g() >> 11) * (1.0 / 9007199254740992.0));
}

inline double gaussian(std::mt19937_64& g) {
    double u1;
    do {
        u1 = (g() >> 11) * (1.0 / 9007199254740992.0);
    } while (u1 <= 0.0);
    const double u2 = (g() >> 11) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline screamloc::AudioClip noise_clip(std::size_t n, int rate, std::uint64_t seed,
                                       double amplitude = 0.5) {
    screamloc::AudioClip clip;
    clip.sample_rate_hz = rate;
    clip.samples.resize(n);
    auto g = rng(seed);
    for (auto& s : clip.samples) s = amplitude * gaussian(g);
    return clip;
}

inline screamloc::AudioClip tone(double freq, double seconds, int rate, double amplitude = 0.5) {
    screamloc::AudioClip clip;
    clip.sample_rate_hz = rate;
    clip.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
        clip.samples[i] = amplitude * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate);
    return clip;
}

// Integer-delay copy: y[n] = x[n - d], zeros shifted in.
inline screamloc::AudioClip delayed(const screamloc::AudioClip& x, int d) {
    screamloc::AudioClip y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.samples.assign(x.samples.size(), 0.0);
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        const long long j = static_cast<long long>(i) + d;
        if (j >= 0 && j < static_cast<long long>(x.samples.size()))
            y.samples[static_cast<std::size_t>(j)] = x.samples[i];
    }
    return y;
}

} // namespace oracle
