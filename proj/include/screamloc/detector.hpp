#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "screamloc/audio.hpp"
#include "screamloc/features.hpp"

namespace screamloc {

/// Binary logistic classifier over standardized features.
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_std; // zero-variance features carry std 1, weight 0
    std::string config_fingerprint;

    std::size_t dim() const { return weights.size(); }
};

/// w_c = N / (2 * N_c) for each class.
std::array<double, 2> auto_class_weights(const std::vector<int>& labels);

/// Full-batch gradient descent on weighted binary cross-entropy, zero init,
/// features standardized by training mean/std. class_weights nullopt = auto.
/// loss_history, when given, receives the loss at every epoch plus the final
/// value.
LogisticModel train_logistic(const std::vector<FeatureVector>& features,
                             const std::vector<int>& labels, int epochs, double learning_rate,
                             std::optional<std::array<double, 2>> class_weights = std::nullopt,
                             std::vector<double>* loss_history = nullptr);

/// sigmoid(w . standardize(x) + b), in [0, 1].
double predict(const LogisticModel& model, const FeatureVector& features);

struct DetectionResult {
    int window_index = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    double score = 0.0;
    bool is_scream = false;
    std::string detector_name;
};

/// RMS threshold baseline: score = min(rms / rms_threshold, 1).
DetectionResult energy_detect(const AudioClip& clip, double rms_threshold);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    ClassMetrics scream;     // positive class
    ClassMetrics non_scream; // roles swapped
    double eer = 0.0;
    double eer_threshold = 0.0;
};

/// Confusion counts at `threshold` (predicted positive when score >= threshold,
/// scream = positive class) plus Acc/P/R/F1 per class and the EER.
MetricsReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold);

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
};

/// Sweeps every distinct score as a threshold and returns (FPR + FNR)/2 at the
/// tau minimizing |FPR - FNR|, ties toward the smallest tau.
EerResult compute_eer(const std::vector<double>& scores, const std::vector<int>& labels);

/// Flat JSON model document {dim, weights, bias, mean, std, config_fingerprint}.
void save_model(const LogisticModel& model, const std::string& path);
LogisticModel load_model(const std::string& path);

} // namespace screamloc
