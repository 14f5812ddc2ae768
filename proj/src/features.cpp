#include "screamloc/features.hpp"

#include <cmath>
#include <sstream>

#include "screamloc/errors.hpp"
#include "screamloc/fft.hpp"

namespace screamloc {

namespace {

constexpr double kLogFloor = 1e-10;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

} // namespace

std::string MfccMatrix::fingerprint() const {
    std::ostringstream s;
    s << "mfcc(nfft=" << config.n_fft << ",hop=" << config.hop << ",nmel=" << config.n_filters
      << ",nmfcc=" << config.n_mfcc << ")@" << sample_rate_hz;
    return s.str();
}

Spectrogram stft(const AudioClip& clip, int n_fft, int hop) {
    clip.validate();
    if (!is_pow2(n_fft)) raise(Errc::invalid_input, "stft: n_fft must be a power of two");
    if (hop <= 0 || hop > n_fft) raise(Errc::invalid_input, "stft: hop must be in (0, n_fft]");
    if (clip.samples.size() < static_cast<std::size_t>(n_fft))
        raise(Errc::clip_too_short, "stft: clip shorter than one frame");

    const int frames =
        1 + static_cast<int>((clip.samples.size() - static_cast<std::size_t>(n_fft)) /
                             static_cast<std::size_t>(hop));
    const int n_bins = n_fft / 2 + 1;

    std::vector<double> hann(n_fft);
    for (int n = 0; n < n_fft; ++n)
        hann[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / n_fft); // periodic form

    Spectrogram spec;
    spec.frames = frames;
    spec.n_bins = n_bins;
    spec.n_fft = n_fft;
    spec.hop = hop;
    spec.sample_rate_hz = clip.sample_rate_hz;
    spec.bins.resize(static_cast<std::size_t>(frames) * n_bins);

    std::vector<std::complex<double>> frame(n_fft);
    for (int t = 0; t < frames; ++t) {
        const std::size_t start = static_cast<std::size_t>(t) * hop;
        for (int n = 0; n < n_fft; ++n) frame[n] = clip.samples[start + n] * hann[n];
        auto spectrum = fft::fft(frame);
        for (int k = 0; k < n_bins; ++k) spec.bins[static_cast<std::size_t>(t) * n_bins + k] = spectrum[k];
    }
    return spec;
}

std::vector<double> mel_filterbank(int n_filters, int n_fft, int sample_rate_hz) {
    if (n_filters < 2) raise(Errc::invalid_input, "mel_filterbank: need at least 2 filters");
    if (!is_pow2(n_fft)) raise(Errc::invalid_input, "mel_filterbank: n_fft must be a power of two");
    if (sample_rate_hz <= 0) raise(Errc::invalid_input, "mel_filterbank: bad sample rate");

    const int n_bins = n_fft / 2 + 1;
    const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);

    std::vector<double> edges(n_filters + 2);
    for (int i = 0; i < n_filters + 2; ++i) edges[i] = mel_to_hz(mel_hi * i / (n_filters + 1));

    std::vector<double> bank(static_cast<std::size_t>(n_filters) * n_bins, 0.0);
    for (int f = 0; f < n_filters; ++f) {
        const double lo = edges[f], center = edges[f + 1], hi = edges[f + 2];
        for (int k = 0; k < n_bins; ++k) {
            const double freq = static_cast<double>(k) * sample_rate_hz / n_fft;
            double w = 0.0;
            if (freq > lo && freq <= center)
                w = (freq - lo) / (center - lo);
            else if (freq > center && freq < hi)
                w = (hi - freq) / (hi - center);
            bank[static_cast<std::size_t>(f) * n_bins + k] = w;
        }
    }
    return bank;
}

MfccMatrix mfcc(const AudioClip& clip, const MfccConfig& config) {
    if (config.n_mfcc > config.n_filters)
        raise(Errc::invalid_input, "mfcc: n_mfcc must not exceed n_filters");
    const Spectrogram spec = stft(clip, config.n_fft, config.hop);
    const auto bank = mel_filterbank(config.n_filters, config.n_fft, clip.sample_rate_hz);

    const int n_bins = spec.n_bins;
    const int F = config.n_filters;

    // Orthonormal DCT-II over the filter axis.
    std::vector<double> dct(static_cast<std::size_t>(config.n_mfcc) * F);
    for (int n = 0; n < config.n_mfcc; ++n) {
        const double scale = std::sqrt((n == 0 ? 1.0 : 2.0) / F);
        for (int f = 0; f < F; ++f)
            dct[static_cast<std::size_t>(n) * F + f] =
                scale * std::cos(M_PI * n * (2 * f + 1) / (2.0 * F));
    }

    MfccMatrix out;
    out.frames = spec.frames;
    out.n_mfcc = config.n_mfcc;
    out.config = config;
    out.sample_rate_hz = clip.sample_rate_hz;
    out.coeffs.resize(static_cast<std::size_t>(spec.frames) * config.n_mfcc);

    std::vector<double> power(n_bins);
    std::vector<double> logmel(F);
    for (int t = 0; t < spec.frames; ++t) {
        for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spec.at(t, k));
        for (int f = 0; f < F; ++f) {
            double e = 0.0;
            const double* row = bank.data() + static_cast<std::size_t>(f) * n_bins;
            for (int k = 0; k < n_bins; ++k) e += row[k] * power[k];
            logmel[f] = std::log(e + kLogFloor);
        }
        for (int n = 0; n < config.n_mfcc; ++n) {
            double acc = 0.0;
            const double* row = dct.data() + static_cast<std::size_t>(n) * F;
            for (int f = 0; f < F; ++f) acc += row[f] * logmel[f];
            out.coeffs[static_cast<std::size_t>(t) * config.n_mfcc + n] = acc;
        }
    }
    return out;
}

FeatureVector summarize(const MfccMatrix& m) {
    if (m.frames < 1) raise(Errc::invalid_input, "summarize: no frames");
    const int d = m.n_mfcc;
    FeatureVector out(2 * static_cast<std::size_t>(d), 0.0);
    for (int n = 0; n < d; ++n) {
        double mean = 0.0;
        for (int t = 0; t < m.frames; ++t) mean += m.at(t, n);
        mean /= m.frames;
        double var = 0.0;
        for (int t = 0; t < m.frames; ++t) {
            const double dlt = m.at(t, n) - mean;
            var += dlt * dlt;
        }
        var /= m.frames; // population variance
        out[n] = mean;
        out[d + n] = std::sqrt(var);
    }
    return out;
}

} // namespace screamloc
