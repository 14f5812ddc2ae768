#pragma once

#include <string>
#include <vector>

#include "screamloc/detector.hpp"
#include "screamloc/features.hpp"
#include "screamloc/geometry.hpp"
#include "screamloc/localizer.hpp"
#include "screamloc/simulator.hpp"
#include "screamloc/tdoa.hpp"

namespace screamloc {

constexpr int kPipelineSampleRateHz = 16000;
constexpr int kAlertSchemaVersion = 1;

struct DetectorChoice {
    enum class Type { energy, logistic };
    Type type = Type::energy;
    double rms_threshold = 0.05; // energy detector
    std::string model_path;     // logistic detector
};

struct PipelineConfig {
    std::string geometry_path;
    DetectorChoice detector;
    double threshold = 0.5; // alert when score >= threshold
    double window_s = 10.0;
    double hop_s = 10.0;
    CorrelationMethod correlator = CorrelationMethod::gcc_phat;
    SolverOptions solver; // c is taken from the geometry file
    double srp_grid_step_m = 0.5;
    MfccConfig mfcc; // feature config for the logistic detector
    std::string output_dir = "out";
};

/// Parses and validates the JSON config. Relative paths inside the file are
/// resolved against the config file's directory.
PipelineConfig load_pipeline_config(const std::string& path);

/// Exit codes: 0 ok, 2 config, 3 channel/geometry mismatch, 4 data.
struct RunSummary {
    int exit_code = 0;
    int windows = 0;
    int alerts = 0;
    std::string out_dir;
    std::string error;
};

/// One window's worth of work: detection on the reference channel and, when
/// positive (or forced), correlation, SRP initialization, and descent.
struct WindowResult {
    DetectionResult detection;
    bool localized = false;
    bool degenerate_correlation = false;
    std::vector<PairCorrelation> curves;
    std::vector<TdoaMeasurement> taus;
    SrpPeak init;
    PositionEstimate estimate;
};

WindowResult process_window(const MultichannelRecording& window, const Geometry& geometry,
                            const PipelineConfig& config, const LogisticModel* model,
                            int window_index, double start_s, bool force_localize);

/// End-to-end run over per-mic WAV files (positional, geometry order) or a
/// scene file. Writes alerts.jsonl, correlations/<w>_<i>_<j>.csv,
/// descent/<w>.csv and summary.json under out_dir. Never throws; failures are
/// reported through the exit code.
RunSummary run_pipeline(const PipelineConfig& config, const std::vector<std::string>& wav_paths,
                        const std::string& scene_path, bool force_localize,
                        const std::string& out_dir_override = "");

struct TrainConfig {
    double clip_seconds = 10.0; // every file is padded/truncated to this
    MfccConfig mfcc;
    int epochs = 400;
    double learning_rate = 0.05;
};

std::string feature_fingerprint(const TrainConfig& cfg);

struct LabeledFeatures {
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    std::vector<std::string> basenames;
};

/// Scans <dir>/scream and <dir>/non_scream recursively for *.wav and extracts
/// one pooled MFCC feature vector per file.
LabeledFeatures load_labeled_features(const std::string& data_dir, const TrainConfig& cfg);

/// Deterministic 80/20 membership by FNV-1a hash of the file's basename.
bool in_train_split(const std::string& basename);

/// Trains on every file in the directory.
LogisticModel train_from_directory(const std::string& data_dir, const TrainConfig& cfg);

struct EvaluationOutcome {
    MetricsReport metrics;
    LogisticModel model;
    int n_train = 0;
    int n_test = 0;
};

/// 80/20 hash split, trains on the large side, evaluates on the rest and
/// writes the metrics JSON (confusion counts, per-class metrics, EER).
EvaluationOutcome evaluate_detector(const std::string& data_dir, const TrainConfig& cfg,
                                    const std::string& metrics_out_path);

} // namespace screamloc
