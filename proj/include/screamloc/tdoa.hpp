#pragma once

#include <string>
#include <vector>

#include "screamloc/audio.hpp"
#include "screamloc/geometry.hpp"

namespace screamloc {

enum class CorrelationMethod { direct, gcc, gcc_phat };

std::string to_string(CorrelationMethod m);
CorrelationMethod correlation_method_from_string(const std::string& s);

/// Cross-correlation curve over integer lags -max_lag..+max_lag.
/// correlation[k] holds lag k - max_lag. peak_lag_samples is the integer
/// argmax (ties resolved toward smaller |lag|, negative first).
struct GccResult {
    std::vector<double> correlation;
    int max_lag = 0;
    CorrelationMethod method = CorrelationMethod::direct;
    double peak_lag_samples = 0.0;
    double peak_value = 0.0;
    int sample_rate_hz = 0;
    bool degenerate = false; // all-zero or all-equal curve

    int n_lags() const { return 2 * max_lag + 1; }
    /// Value at an integer lag; 0 outside the stored range.
    double at_lag(int lag) const {
        if (lag < -max_lag || lag > max_lag) return 0.0;
        return correlation[static_cast<std::size_t>(lag + max_lag)];
    }
};

/// Brute-force time-domain correlation: corr[l] = sum_n x[n] * y[n+l], zero
/// outside bounds. Reference path for the FFT correlators.
GccResult cross_correlate_direct(const AudioClip& x, const AudioClip& y, int max_lag);

/// Unwhitened cross-correlation via a zero-padded FFT (linear, not circular).
GccResult gcc(const AudioClip& x, const AudioClip& y, int max_lag);

/// Phase-transform correlation: the cross-spectrum is divided per bin by
/// max(|X||Y|, floor) before the inverse transform, keeping phase only.
/// whitening_floor is relative to the largest bin magnitude product.
GccResult gcc_phat(const AudioClip& x, const AudioClip& y, int max_lag,
                   double whitening_floor = 1e-12);

/// Per-pair delay estimate. tau_s follows (d_i - d_j)/c: positive when the
/// signal reaches mic i after mic j. weight is the correlation peak sharpness.
struct TdoaMeasurement {
    std::string mic_i;
    std::string mic_j;
    double tau_s = 0.0;
    double weight = 1.0;
    double peak_sharpness = 1.0;
};

/// Peak pick restricted to physically feasible lags for the mic spacing, with
/// 3-point parabolic sub-sample refinement. Mic ids are left for the caller.
TdoaMeasurement pick_tdoa(const GccResult& result, double mic_distance_m, double c);

struct PairCorrelation {
    std::string mic_i;
    std::string mic_j;
    GccResult gcc;
};

/// One correlation per unordered mic pair (i < j in array order). Curves are
/// oriented so that a positive lag means mic i receives after mic j, i.e. the
/// peak lag over the sample rate estimates (d_i - d_j)/c directly.
std::vector<PairCorrelation> pair_correlations(const MultichannelRecording& rec,
                                               const MicArray& array, CorrelationMethod method,
                                               double c);

/// pick_tdoa applied to every pair correlation; M(M-1)/2 measurements ordered
/// by (i, j).
std::vector<TdoaMeasurement> tdoa_matrix(const MultichannelRecording& rec, const MicArray& array,
                                         CorrelationMethod method, double c);

/// CSV with columns lag_samples, lag_ms, value.
void write_correlation_csv(const GccResult& result, const std::string& path);

} // namespace screamloc
