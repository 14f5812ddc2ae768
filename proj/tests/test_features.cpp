#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "screamloc/errors.hpp"
#include "screamloc/features.hpp"

using namespace screamloc;

TEST_CASE("stft of silence is zero") {
    AudioClip clip;
    clip.sample_rate_hz = 16000;
    clip.samples.assign(4096, 0.0);
    const Spectrogram spec = stft(clip, 512, 256);
    CHECK(spec.frames == 1 + (4096 - 512) / 256);
    for (const auto& v : spec.bins) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("stft puts a bin-centered sine at its bin in every frame") {
    const int n_fft = 512, k = 20, sr = 16000;
    const double freq = static_cast<double>(k) * sr / n_fft;
    const AudioClip clip = oracle::tone(freq, 0.5, sr);
    const Spectrogram spec = stft(clip, n_fft, 256);
    for (int t = 0; t < spec.frames; ++t) {
        int peak = 0;
        double best = -1.0;
        for (int b = 0; b < spec.n_bins; ++b) {
            const double m = std::abs(spec.at(t, b));
            if (m > best) {
                best = m;
                peak = b;
            }
        }
        CHECK(peak == k);
    }
}

TEST_CASE("stft satisfies Parseval per frame") {
    const AudioClip clip = oracle::noise_clip(16000, 16000, 77);
    const int n_fft = 512, hop = 256;
    const Spectrogram spec = stft(clip, n_fft, hop);

    for (int t = 0; t < spec.frames; ++t) {
        // windowed time-domain energy, recomputed from the raw samples
        double time_energy = 0.0;
        for (int i = 0; i < n_fft; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n_fft);
            const double v = clip.samples[static_cast<std::size_t>(t) * hop + i] * w;
            time_energy += v * v;
        }
        // two-sided spectral energy from the one-sided bins
        double spec_energy = std::norm(spec.at(t, 0)) + std::norm(spec.at(t, n_fft / 2));
        for (int b = 1; b < n_fft / 2; ++b) spec_energy += 2.0 * std::norm(spec.at(t, b));
        spec_energy /= n_fft;
        CHECK(spec_energy == doctest::Approx(time_energy).epsilon(1e-6));
    }
}

TEST_CASE("stft rejects short clips") {
    AudioClip clip;
    clip.sample_rate_hz = 16000;
    clip.samples.assign(100, 0.0);
    CHECK_THROWS_AS(stft(clip, 512, 256), Error);
}

TEST_CASE("mel filterbank shape") {
    const int F = 26, n_fft = 512, sr = 16000;
    const auto bank = mel_filterbank(F, n_fft, sr);
    const int n_bins = n_fft / 2 + 1;

    double last_peak_freq = -1.0;
    for (int f = 0; f < F; ++f) {
        const double* row = bank.data() + static_cast<std::size_t>(f) * n_bins;
        double best = -1.0;
        int peak = 0, n_at_max = 0;
        for (int k = 0; k < n_bins; ++k) {
            CHECK(row[k] >= 0.0);
            if (row[k] > best) {
                best = row[k];
                peak = k;
            }
        }
        for (int k = 0; k < n_bins; ++k)
            if (row[k] == best) ++n_at_max;
        CHECK(n_at_max == 1); // exactly one maximum
        CHECK(best > 0.0);

        // unimodal: non-decreasing then non-increasing over the support
        for (int k = 1; k <= peak; ++k) CHECK(row[k] >= row[k - 1]);
        for (int k = peak + 1; k < n_bins; ++k) CHECK(row[k] <= row[k - 1]);

        const double peak_freq = static_cast<double>(peak) * sr / n_fft;
        CHECK(peak_freq > last_peak_freq); // strictly increasing centers
        last_peak_freq = peak_freq;
    }

    // coverage: the summed response stays positive between the first and last
    // filter peaks
    const double* row0 = bank.data();
    const double* rowN = bank.data() + static_cast<std::size_t>(F - 1) * n_bins;
    const int first_peak = static_cast<int>(std::max_element(row0, row0 + n_bins) - row0);
    const int last_peak = static_cast<int>(std::max_element(rowN, rowN + n_bins) - rowN);
    for (int k = first_peak; k <= last_peak; ++k) {
        double sum = 0.0;
        for (int f = 0; f < F; ++f) sum += bank[static_cast<std::size_t>(f) * n_bins + k];
        CHECK(sum > 0.0);
    }
}

TEST_CASE("mfcc of silence is the DCT of the constant log-floor vector") {
    AudioClip clip;
    clip.sample_rate_hz = 16000;
    clip.samples.assign(2048, 0.0);
    const MfccMatrix m = mfcc(clip);
    const double c0 = std::sqrt(26.0) * std::log(1e-10);
    for (int t = 0; t < m.frames; ++t) {
        CHECK(m.at(t, 0) == doctest::Approx(c0).epsilon(1e-12));
        for (int n = 1; n < m.n_mfcc; ++n) CHECK(m.at(t, n) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("doubling the waveform shifts only coefficient zero") {
    AudioClip clip = oracle::noise_clip(4096, 16000, 5, 0.4);
    AudioClip doubled = clip;
    for (auto& s : doubled.samples) s *= 2.0;

    const MfccMatrix a = mfcc(clip);
    const MfccMatrix b = mfcc(doubled);
    const double shift = std::sqrt(26.0) * std::log(4.0);
    for (int t = 0; t < a.frames; ++t) {
        CHECK(b.at(t, 0) - a.at(t, 0) == doctest::Approx(shift).epsilon(1e-6));
        for (int n = 1; n < a.n_mfcc; ++n)
            CHECK(b.at(t, n) == doctest::Approx(a.at(t, n)).epsilon(1e-6));
    }
}

TEST_CASE("mfcc matches an independent reference implementation") {
    const AudioClip clip = oracle::noise_clip(2048, 16000, 42, 0.5);
    const MfccConfig cfg;
    const MfccMatrix m = mfcc(clip, cfg);
    const auto ref = oracle::reference_mfcc(clip, cfg.n_fft, cfg.hop, cfg.n_filters, cfg.n_mfcc);
    REQUIRE(static_cast<std::size_t>(m.frames) == ref.size());
    for (int t = 0; t < m.frames; ++t)
        for (int n = 0; n < m.n_mfcc; ++n) CHECK(std::abs(m.at(t, n) - ref[t][n]) < 1e-4);
}

TEST_CASE("extending a clip leaves earlier frames untouched") {
    const AudioClip clip = oracle::noise_clip(4096, 16000, 9, 0.4);
    AudioClip longer = clip;
    longer.samples.resize(8192, 0.0);

    const MfccMatrix a = mfcc(clip);
    const MfccMatrix b = mfcc(longer);
    REQUIRE(b.frames >= a.frames);
    for (int t = 0; t < a.frames; ++t)
        for (int n = 0; n < a.n_mfcc; ++n) CHECK(a.at(t, n) == b.at(t, n));
}

TEST_CASE("the DCT-II is orthonormal") {
    // keep all coefficients so the transpose inverts the transform
    MfccConfig cfg;
    cfg.n_mfcc = cfg.n_filters;
    const AudioClip clip = oracle::noise_clip(2048, 16000, 17, 0.5);
    const MfccMatrix m = mfcc(clip, cfg);

    // recompute the log-mel energies the same way mfcc's front half does
    const Spectrogram spec = stft(clip, cfg.n_fft, cfg.hop);
    const auto bank = mel_filterbank(cfg.n_filters, cfg.n_fft, clip.sample_rate_hz);
    const int F = cfg.n_filters;
    for (int t = 0; t < m.frames; ++t) {
        std::vector<double> logmel(F);
        for (int f = 0; f < F; ++f) {
            double e = 0.0;
            for (int k = 0; k < spec.n_bins; ++k)
                e += bank[static_cast<std::size_t>(f) * spec.n_bins + k] * std::norm(spec.at(t, k));
            logmel[f] = std::log(e + 1e-10);
        }
        for (int f = 0; f < F; ++f) {
            double rec = 0.0;
            for (int n = 0; n < F; ++n) {
                const double scale = std::sqrt((n == 0 ? 1.0 : 2.0) / F);
                rec += m.at(t, n) * scale * std::cos(M_PI * n * (2 * f + 1) / (2.0 * F));
            }
            CHECK(rec == doctest::Approx(logmel[f]).epsilon(1e-9));
        }
    }
}

TEST_CASE("mfcc is deterministic") {
    const AudioClip clip = oracle::noise_clip(4096, 16000, 23, 0.5);
    const MfccMatrix a = mfcc(clip);
    const MfccMatrix b = mfcc(clip);
    CHECK(a.coeffs == b.coeffs);
}

TEST_CASE("summarize pools mean then population std") {
    MfccMatrix single;
    single.frames = 1;
    single.n_mfcc = 3;
    single.coeffs = {1.0, -2.0, 3.0};
    const FeatureVector fv = summarize(single);
    REQUIRE(fv.size() == 6);
    CHECK(fv[0] == 1.0);
    CHECK(fv[1] == -2.0);
    CHECK(fv[2] == 3.0);
    CHECK(fv[3] == 0.0);
    CHECK(fv[4] == 0.0);
    CHECK(fv[5] == 0.0);

    MfccMatrix pm;
    pm.frames = 2;
    pm.n_mfcc = 2;
    pm.coeffs = {0.5, -1.5, -0.5, 1.5}; // rows v and -v
    const FeatureVector sym = summarize(pm);
    CHECK(sym[0] == 0.0);
    CHECK(sym[1] == 0.0);
    CHECK(sym[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sym[3] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("summarize matches a direct two-pass computation") {
    MfccMatrix m;
    m.frames = 100;
    m.n_mfcc = 13;
    m.coeffs.resize(1300);
    auto g = oracle::rng(31);
    for (auto& v : m.coeffs) v = oracle::uniform(g, -5.0, 5.0);

    const FeatureVector fv = summarize(m);
    for (int n = 0; n < m.n_mfcc; ++n) {
        double mean = 0.0;
        for (int t = 0; t < m.frames; ++t) mean += m.at(t, n);
        mean /= m.frames;
        double var = 0.0;
        for (int t = 0; t < m.frames; ++t) var += (m.at(t, n) - mean) * (m.at(t, n) - mean);
        var /= m.frames;
        CHECK(fv[n] == mean);
        CHECK(fv[m.n_mfcc + n] == std::sqrt(var));
    }
}
