#include "screamloc/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "screamloc/errors.hpp"

namespace screamloc {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_labels(const std::vector<int>& labels) {
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0)
            has0 = true;
        else if (y == 1)
            has1 = true;
        else
            raise(Errc::invalid_input, "labels must be 0 or 1");
    }
    if (!has0 || !has1) raise(Errc::single_class_data, "need at least one example of each class");
}

} // namespace

std::array<double, 2> auto_class_weights(const std::vector<int>& labels) {
    check_labels(labels);
    const double n = static_cast<double>(labels.size());
    const double n1 = static_cast<double>(std::accumulate(labels.begin(), labels.end(), 0LL));
    const double n0 = n - n1;
    return {n / (2.0 * n0), n / (2.0 * n1)};
}

LogisticModel train_logistic(const std::vector<FeatureVector>& features,
                             const std::vector<int>& labels, int epochs, double learning_rate,
                             std::optional<std::array<double, 2>> class_weights,
                             std::vector<double>* loss_history) {
    if (features.size() != labels.size())
        raise(Errc::dimension_mismatch, "train_logistic: features/labels count mismatch");
    if (features.empty()) raise(Errc::invalid_input, "train_logistic: empty dataset");
    check_labels(labels);
    if (epochs < 1 || learning_rate <= 0)
        raise(Errc::invalid_input, "train_logistic: bad epochs/learning rate");

    const std::size_t dim = features[0].size();
    for (const auto& f : features)
        if (f.size() != dim) raise(Errc::dimension_mismatch, "train_logistic: ragged features");

    const std::size_t n = features.size();
    const auto w_class = class_weights ? *class_weights : auto_class_weights(labels);
    if (w_class[0] <= 0 || w_class[1] <= 0)
        raise(Errc::invalid_input, "train_logistic: class weights must be positive");

    LogisticModel model;
    model.weights.assign(dim, 0.0);
    model.feature_mean.assign(dim, 0.0);
    model.feature_std.assign(dim, 1.0);

    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& f : features) mean += f[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& f : features) {
            const double d = f[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        model.feature_mean[j] = mean;
        model.feature_std[j] = var > 1e-24 ? std::sqrt(var) : 1.0; // constant feature: std 1
    }

    // Standardize once up front.
    std::vector<double> x(n * dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            x[i * dim + j] = (features[i][j] - model.feature_mean[j]) / model.feature_std[j];

    std::vector<double> grad(dim);
    const double inv_n = 1.0 / static_cast<double>(n);

    auto loss_at = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = model.bias;
            const double* xi = x.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) z += model.weights[j] * xi[j];
            const double p = std::clamp(sigmoid(z), 1e-12, 1.0 - 1e-12);
            const double wc = labels[i] == 1 ? w_class[1] : w_class[0];
            loss -= wc * (labels[i] == 1 ? std::log(p) : std::log(1.0 - p));
        }
        return loss * inv_n;
    };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        if (loss_history) loss_history->push_back(loss_at());
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = x.data() + i * dim;
            double z = model.bias;
            for (std::size_t j = 0; j < dim; ++j) z += model.weights[j] * xi[j];
            const double wc = labels[i] == 1 ? w_class[1] : w_class[0];
            const double r = wc * (sigmoid(z) - labels[i]);
            for (std::size_t j = 0; j < dim; ++j) grad[j] += r * xi[j];
            grad_bias += r;
        }
        for (std::size_t j = 0; j < dim; ++j) model.weights[j] -= learning_rate * inv_n * grad[j];
        model.bias -= learning_rate * inv_n * grad_bias;
    }
    if (loss_history) loss_history->push_back(loss_at());
    return model;
}

double predict(const LogisticModel& model, const FeatureVector& features) {
    if (features.size() != model.dim())
        raise(Errc::dimension_mismatch, "predict: feature dimension mismatch");
    double z = model.bias;
    for (std::size_t j = 0; j < features.size(); ++j)
        z += model.weights[j] * (features[j] - model.feature_mean[j]) / model.feature_std[j];
    return sigmoid(z);
}

DetectionResult energy_detect(const AudioClip& clip, double rms_threshold) {
    clip.validate();
    if (clip.samples.empty()) raise(Errc::empty_clip, "energy_detect: empty clip");
    if (rms_threshold <= 0) raise(Errc::invalid_input, "energy_detect: threshold must be positive");
    double power = 0.0;
    for (double s : clip.samples) power += s * s;
    const double rms = std::sqrt(power / static_cast<double>(clip.samples.size()));

    DetectionResult r;
    r.window_index = 0;
    r.start_s = 0.0;
    r.end_s = clip.duration_s();
    r.score = std::min(rms / rms_threshold, 1.0);
    r.is_scream = rms >= rms_threshold;
    r.detector_name = "energy";
    return r;
}

namespace {

ClassMetrics class_metrics(long long tp, long long fp, long long fn) {
    ClassMetrics m;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    return m;
}

} // namespace

MetricsReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
    if (scores.size() != labels.size())
        raise(Errc::length_mismatch, "evaluate: scores/labels length mismatch");
    if (scores.empty()) raise(Errc::invalid_input, "evaluate: empty input");

    MetricsReport r;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual)
            ++r.tp;
        else if (predicted && !actual)
            ++r.fp;
        else if (!predicted && actual)
            ++r.fn;
        else
            ++r.tn;
    }
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(scores.size());
    r.scream = class_metrics(r.tp, r.fp, r.fn);
    r.non_scream = class_metrics(r.tn, r.fn, r.fp); // positive-class roles swapped
    const EerResult eer = compute_eer(scores, labels);
    r.eer = eer.eer;
    r.eer_threshold = eer.threshold;
    return r;
}

EerResult compute_eer(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        raise(Errc::length_mismatch, "compute_eer: scores/labels length mismatch");
    check_labels(labels);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    long long n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;

    // Walk thresholds in ascending score order; at tau = s, predicted positive
    // means score >= s, so everything strictly below the cursor is negative.
    EerResult best;
    double best_gap = std::numeric_limits<double>::infinity();
    long long pos_below = 0, neg_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double tau = scores[order[i]];
        const double fpr = static_cast<double>(n_neg - neg_below) / static_cast<double>(n_neg);
        const double fnr = static_cast<double>(pos_below) / static_cast<double>(n_pos);
        const double gap = std::abs(fpr - fnr);
        if (gap < best_gap) { // ties keep the smallest tau
            best_gap = gap;
            best.eer = (fpr + fnr) / 2.0;
            best.threshold = tau;
        }
        // advance past this distinct score
        while (i < order.size() && scores[order[i]] == tau) {
            (labels[order[i]] == 1 ? pos_below : neg_below)++;
            ++i;
        }
    }
    return best;
}

void save_model(const LogisticModel& model, const std::string& path) {
    nlohmann::json j;
    j["dim"] = model.dim();
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["mean"] = model.feature_mean;
    j["std"] = model.feature_std;
    j["config_fingerprint"] = model.config_fingerprint;
    std::ofstream f(path, std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write model: " + path);
    f << j.dump(2) << "\n";
}

LogisticModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(Errc::file_not_found, "cannot open model: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::corrupt_header, "model is not valid JSON: " + std::string(e.what()));
    }
    LogisticModel model;
    try {
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        model.feature_mean = j.at("mean").get<std::vector<double>>();
        model.feature_std = j.at("std").get<std::vector<double>>();
        model.config_fingerprint = j.value("config_fingerprint", "");
        const auto dim = j.at("dim").get<std::size_t>();
        if (dim != model.weights.size() || dim != model.feature_mean.size() ||
            dim != model.feature_std.size())
            raise(Errc::dimension_mismatch, "model dimensions disagree: " + path);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::corrupt_header, "model JSON missing fields: " + std::string(e.what()));
    }
    for (double s : model.feature_std)
        if (s <= 0) raise(Errc::invalid_input, "model feature_std must be positive");
    return model;
}

} // namespace screamloc
