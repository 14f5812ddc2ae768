#include <cmath>
#include <numeric>
#include <vector>

#include "screamloc/audio_io.hpp"
#include "screamloc/errors.hpp"

namespace screamloc {

namespace {

constexpr int kTaps = 64;
constexpr int kHalf = kTaps / 2;
constexpr double kKaiserBeta = 8.6;
constexpr long long kMaxPhaseTable = 16384;

double bessel_i0(double x) {
    // power series, converges quickly for the argument range used here
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

// Windowed-sinc tap at offset u (in input samples) from the ideal instant.
double tap(double u, double cutoff, double i0_beta) {
    if (std::abs(u) >= kHalf) return 0.0;
    const double r = u / kHalf;
    const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    return cutoff * sinc(cutoff * u) * window;
}

// Taps for one fractional phase, normalized to unit DC gain.
void fill_phase(double frac, double cutoff, double i0_beta, double* w) {
    double sum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
        const double u = (k - kHalf + 1) - frac;
        w[k] = tap(u, cutoff, i0_beta);
        sum += w[k];
    }
    if (sum != 0.0)
        for (int k = 0; k < kTaps; ++k) w[k] /= sum;
}

} // namespace

AudioClip resample(const AudioClip& clip, int target_hz) {
    clip.validate();
    if (target_hz <= 0) raise(Errc::invalid_input, "resample: target rate must be positive");
    if (target_hz == clip.sample_rate_hz) return clip;

    const long long src = clip.sample_rate_hz;
    const long long dst = target_hz;
    const long long g = std::gcd(src, dst);
    const long long a = src / g; // input step per output sample = a/b
    const long long b = dst / g;

    const std::size_t n_in = clip.samples.size();
    const auto n_out = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_in) * static_cast<double>(dst) / static_cast<double>(src)));

    AudioClip out;
    out.sample_rate_hz = target_hz;
    out.samples.assign(n_out, 0.0);
    if (n_in == 0 || n_out == 0) return out;

    const double cutoff = std::min(1.0, static_cast<double>(dst) / static_cast<double>(src));
    const double i0_beta = bessel_i0(kKaiserBeta);

    // The fractional position (m*a mod b)/b cycles with period b, so the tap
    // set is precomputable per phase when b stays small.
    std::vector<double> table;
    const bool use_table = b <= kMaxPhaseTable;
    if (use_table) {
        table.resize(static_cast<std::size_t>(b) * kTaps);
        for (long long p = 0; p < b; ++p)
            fill_phase(static_cast<double>(p) / static_cast<double>(b), cutoff, i0_beta,
                       table.data() + p * kTaps);
    }

    std::vector<double> scratch(kTaps);
    const auto n_in_ll = static_cast<long long>(n_in);
    for (std::size_t m = 0; m < n_out; ++m) {
        const long long num = static_cast<long long>(m) * a;
        const long long i0 = num / b;
        const long long p = num % b;
        const double* w;
        if (use_table) {
            w = table.data() + p * kTaps;
        } else {
            fill_phase(static_cast<double>(p) / static_cast<double>(b), cutoff, i0_beta,
                       scratch.data());
            w = scratch.data();
        }
        double acc = 0.0;
        const long long first = i0 - kHalf + 1;
        for (int k = 0; k < kTaps; ++k) {
            const long long idx = first + k;
            if (idx >= 0 && idx < n_in_ll) acc += clip.samples[static_cast<std::size_t>(idx)] * w[k];
        }
        out.samples[m] = acc;
    }
    return out;
}

} // namespace screamloc
