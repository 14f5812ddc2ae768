#include "screamloc/tdoa.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "screamloc/errors.hpp"
#include "screamloc/fft.hpp"

namespace screamloc {

std::string to_string(CorrelationMethod m) {
    switch (m) {
        case CorrelationMethod::direct: return "direct";
        case CorrelationMethod::gcc: return "gcc";
        case CorrelationMethod::gcc_phat: return "gcc_phat";
    }
    return "?";
}

CorrelationMethod correlation_method_from_string(const std::string& s) {
    if (s == "direct") return CorrelationMethod::direct;
    if (s == "gcc") return CorrelationMethod::gcc;
    if (s == "gcc_phat") return CorrelationMethod::gcc_phat;
    raise(Errc::config, "unknown correlation method: " + s);
}

namespace {

void check_pair(const AudioClip& x, const AudioClip& y, int max_lag) {
    x.validate();
    y.validate();
    if (x.samples.size() != y.samples.size())
        raise(Errc::length_mismatch, "correlation inputs differ in length");
    if (x.sample_rate_hz != y.sample_rate_hz)
        raise(Errc::rate_mismatch, "correlation inputs differ in sample rate");
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= x.samples.size())
        raise(Errc::invalid_input, "max_lag must be in [0, length)");
}

// Integer argmax with ties resolved toward smaller |lag| (negative first), and
// degenerate detection for flat curves.
void finalize_peak(GccResult& r) {
    const int L = r.max_lag;
    double best = -std::numeric_limits<double>::infinity();
    int best_lag = 0;
    for (int a = 0; a <= L; ++a) {
        for (int sign = -1; sign <= 1; sign += 2) {
            if (a == 0 && sign > 0) continue;
            const int lag = sign * a;
            const double v = r.at_lag(lag);
            if (v > best) {
                best = v;
                best_lag = lag;
            }
        }
    }
    r.peak_lag_samples = best_lag;
    r.peak_value = best;
    const auto [lo, hi] = std::minmax_element(r.correlation.begin(), r.correlation.end());
    r.degenerate = (*lo == *hi);
}

struct Spectra {
    std::vector<std::complex<double>> bins;
    std::size_t padded = 0;
};

Spectra forward_padded(const AudioClip& clip, std::size_t padded) {
    std::vector<std::complex<double>> buf(padded);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) buf[i] = clip.samples[i];
    return {fft::fft(buf), padded};
}

// Shared inverse path for the FFT correlators; cross = conj(X)*Y per bin,
// optionally phase-whitened, so positive lags mean y lags x.
GccResult correlate_spectra(const Spectra& X, const Spectra& Y, int max_lag, bool phat,
                            double whitening_floor, int sample_rate_hz) {
    const std::size_t P = X.padded;
    std::vector<std::complex<double>> cross(P);
    for (std::size_t k = 0; k < P; ++k) cross[k] = std::conj(X.bins[k]) * Y.bins[k];

    if (phat) {
        double max_mag = 0.0;
        for (const auto& c : cross) max_mag = std::max(max_mag, std::abs(c));
        if (max_mag == 0.0) {
            GccResult r;
            r.max_lag = max_lag;
            r.method = CorrelationMethod::gcc_phat;
            r.sample_rate_hz = sample_rate_hz;
            r.correlation.assign(2 * static_cast<std::size_t>(max_lag) + 1, 0.0);
            r.degenerate = true;
            return r;
        }
        const double floor = whitening_floor * max_mag;
        for (auto& c : cross) c /= std::max(std::abs(c), floor);
    }

    const auto corr = fft::ifft(cross);
    GccResult r;
    r.max_lag = max_lag;
    r.method = phat ? CorrelationMethod::gcc_phat : CorrelationMethod::gcc;
    r.sample_rate_hz = sample_rate_hz;
    r.correlation.resize(2 * static_cast<std::size_t>(max_lag) + 1);
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : P + lag;
        r.correlation[static_cast<std::size_t>(lag + max_lag)] = corr[idx].real();
    }
    finalize_peak(r);
    return r;
}

} // namespace

GccResult cross_correlate_direct(const AudioClip& x, const AudioClip& y, int max_lag) {
    check_pair(x, y, max_lag);
    const auto n = static_cast<long long>(x.samples.size());
    GccResult r;
    r.max_lag = max_lag;
    r.method = CorrelationMethod::direct;
    r.sample_rate_hz = x.sample_rate_hz;
    r.correlation.resize(2 * static_cast<std::size_t>(max_lag) + 1);
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        const long long lo = std::max(0LL, -static_cast<long long>(lag));
        const long long hi = std::min(n, n - lag);
        double acc = 0.0;
        for (long long i = lo; i < hi; ++i)
            acc += x.samples[static_cast<std::size_t>(i)] *
                   y.samples[static_cast<std::size_t>(i + lag)];
        r.correlation[static_cast<std::size_t>(lag + max_lag)] = acc;
    }
    finalize_peak(r);
    return r;
}

GccResult gcc(const AudioClip& x, const AudioClip& y, int max_lag) {
    check_pair(x, y, max_lag);
    const std::size_t P = fft::next_pow2(2 * x.samples.size() - 1); // linear correlation
    return correlate_spectra(forward_padded(x, P), forward_padded(y, P), max_lag, false, 0.0,
                             x.sample_rate_hz);
}

GccResult gcc_phat(const AudioClip& x, const AudioClip& y, int max_lag, double whitening_floor) {
    check_pair(x, y, max_lag);
    if (whitening_floor <= 0) raise(Errc::invalid_input, "whitening floor must be positive");
    const std::size_t P = fft::next_pow2(2 * x.samples.size() - 1);
    return correlate_spectra(forward_padded(x, P), forward_padded(y, P), max_lag, true,
                             whitening_floor, x.sample_rate_hz);
}

TdoaMeasurement pick_tdoa(const GccResult& result, double mic_distance_m, double c) {
    if (c <= 0 || mic_distance_m <= 0)
        raise(Errc::invalid_input, "pick_tdoa: distance and c must be positive");
    if (result.sample_rate_hz <= 0) raise(Errc::invalid_input, "pick_tdoa: missing sample rate");
    if (result.degenerate)
        raise(Errc::degenerate_correlation, "pick_tdoa: flat correlation curve");

    const double sr = result.sample_rate_hz;
    const int feasible =
        static_cast<int>(std::ceil(mic_distance_m / c * sr)) + 2; // slack for interpolation
    const int window = std::min(result.max_lag, feasible);

    // argmax in the window, smaller |lag| first
    double best = -std::numeric_limits<double>::infinity();
    int peak = 0;
    for (int a = 0; a <= window; ++a) {
        for (int sign = -1; sign <= 1; sign += 2) {
            if (a == 0 && sign > 0) continue;
            const int lag = sign * a;
            const double v = result.at_lag(lag);
            if (v > best) {
                best = v;
                peak = lag;
            }
        }
    }

    // 3-point parabolic refinement
    double offset = 0.0;
    if (peak > -result.max_lag && peak < result.max_lag) {
        const double ym = result.at_lag(peak - 1);
        const double y0 = result.at_lag(peak);
        const double yp = result.at_lag(peak + 1);
        const double denom = ym - 2.0 * y0 + yp;
        if (std::abs(denom) > 1e-30) {
            offset = 0.5 * (ym - yp) / denom;
            if (std::abs(offset) > 1.0) offset = 0.0; // not a proper peak
        }
    }

    // strongest rival local maximum outside +-2 samples of the peak
    double rival = -std::numeric_limits<double>::infinity();
    for (int lag = -window; lag <= window; ++lag) {
        if (std::abs(lag - peak) <= 2) continue;
        const double v = result.at_lag(lag);
        const double left = lag - 1 >= -result.max_lag ? result.at_lag(lag - 1) : v;
        const double right = lag + 1 <= result.max_lag ? result.at_lag(lag + 1) : v;
        if (v >= left && v >= right) rival = std::max(rival, v);
    }
    double sharpness;
    if (best <= 0.0)
        sharpness = 1.0;
    else if (rival <= 0.0)
        sharpness = 100.0;
    else
        sharpness = std::clamp(best / rival, 1.0, 100.0);

    const double bound = mic_distance_m / c + 2.0 / sr; // physical feasibility
    TdoaMeasurement m;
    m.tau_s = std::clamp((peak + offset) / sr, -bound, bound);
    m.peak_sharpness = sharpness;
    m.weight = sharpness;
    return m;
}

std::vector<PairCorrelation> pair_correlations(const MultichannelRecording& rec,
                                               const MicArray& array, CorrelationMethod method,
                                               double c) {
    rec.validate();
    array.validate();
    if (c <= 0) raise(Errc::invalid_input, "pair_correlations: c must be positive");
    if (rec.channels.size() < 2)
        raise(Errc::invalid_input, "pair_correlations: need at least 2 channels");
    if (rec.channels.size() != array.mics.size())
        raise(Errc::id_mismatch, "channel count does not match the array");

    // channels in array order
    std::vector<const AudioClip*> chan(array.mics.size());
    for (std::size_t i = 0; i < array.mics.size(); ++i) {
        bool found = false;
        for (std::size_t k = 0; k < rec.channel_ids.size(); ++k) {
            if (rec.channel_ids[k] == array.mics[i].id) {
                chan[i] = &rec.channels[k];
                found = true;
                break;
            }
        }
        if (!found) raise(Errc::id_mismatch, "no channel for mic " + array.mics[i].id);
    }

    const std::size_t n = chan[0]->samples.size();
    const int sr = chan[0]->sample_rate_hz;
    const std::size_t P = fft::next_pow2(2 * n - 1);

    // Per-channel spectra are shared across pairs for the FFT methods.
    std::vector<Spectra> spectra;
    if (method != CorrelationMethod::direct) {
        spectra.reserve(chan.size());
        for (const AudioClip* clip : chan) spectra.push_back(forward_padded(*clip, P));
    }

    std::vector<PairCorrelation> out;
    out.reserve(array.mics.size() * (array.mics.size() - 1) / 2);
    for (std::size_t i = 0; i < array.mics.size(); ++i) {
        for (std::size_t j = i + 1; j < array.mics.size(); ++j) {
            const double dist = distance(array.mics[i].pos, array.mics[j].pos);
            const int max_lag = std::min(static_cast<int>(n) - 1,
                                         static_cast<int>(std::ceil(dist / c * sr)) + 2);
            PairCorrelation pc;
            pc.mic_i = array.mics[i].id;
            pc.mic_j = array.mics[j].id;
            // x = channel j, y = channel i: a positive peak lag then estimates
            // (d_i - d_j)/c with the same sign as expected_tdoa.
            if (method == CorrelationMethod::direct)
                pc.gcc = cross_correlate_direct(*chan[j], *chan[i], max_lag);
            else
                pc.gcc = correlate_spectra(spectra[j], spectra[i], max_lag,
                                           method == CorrelationMethod::gcc_phat, 1e-12, sr);
            out.push_back(std::move(pc));
        }
    }
    return out;
}

std::vector<TdoaMeasurement> tdoa_matrix(const MultichannelRecording& rec, const MicArray& array,
                                         CorrelationMethod method, double c) {
    auto curves = pair_correlations(rec, array, method, c);
    std::vector<TdoaMeasurement> out;
    out.reserve(curves.size());
    for (const auto& pc : curves) {
        const double dist = distance(array.mics[array.index_of(pc.mic_i)].pos,
                                     array.mics[array.index_of(pc.mic_j)].pos);
        TdoaMeasurement m = pick_tdoa(pc.gcc, dist, c);
        m.mic_i = pc.mic_i;
        m.mic_j = pc.mic_j;
        out.push_back(std::move(m));
    }
    return out;
}

void write_correlation_csv(const GccResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write: " + path);
    f << "lag_samples,lag_ms,value\n";
    char line[96];
    for (int lag = -result.max_lag; lag <= result.max_lag; ++lag) {
        const double ms = 1000.0 * lag / result.sample_rate_hz;
        std::snprintf(line, sizeof(line), "%d,%.9g,%.12g\n", lag, ms, result.at_lag(lag));
        f << line;
    }
}

} // namespace screamloc
