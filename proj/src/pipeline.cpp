#include "screamloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "screamloc/audio_io.hpp"
#include "screamloc/errors.hpp"

namespace fs = std::filesystem;

namespace screamloc {

namespace {

std::string resolve_relative(const std::string& base_file, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_file).parent_path() / p).string();
}

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::config:
        case Errc::file_not_found:
        case Errc::unsupported_format:
        case Errc::corrupt_header:
        case Errc::invalid_input:
            return 2;
        case Errc::geometry_mismatch:
        case Errc::id_mismatch:
        case Errc::length_mismatch:
        case Errc::rate_mismatch:
        case Errc::degenerate_geometry:
            return 3;
        case Errc::data:
        case Errc::single_class_data:
            return 4;
        default:
            return 1;
    }
}

} // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(Errc::config, "cannot open config: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "config is not valid JSON: " + std::string(e.what()));
    }

    PipelineConfig cfg;
    try {
        cfg.geometry_path = resolve_relative(path, j.at("geometry").get<std::string>());

        const auto& det = j.at("detector");
        const auto type = det.at("type").get<std::string>();
        if (type == "energy") {
            cfg.detector.type = DetectorChoice::Type::energy;
            cfg.detector.rms_threshold = det.value("rms_threshold", 0.05);
        } else if (type == "logistic") {
            cfg.detector.type = DetectorChoice::Type::logistic;
            cfg.detector.model_path = resolve_relative(path, det.at("model").get<std::string>());
        } else {
            raise(Errc::config, "unknown detector type: " + type);
        }

        cfg.threshold = j.value("threshold", 0.5);
        cfg.window_s = j.value("window_s", 10.0);
        cfg.hop_s = j.value("hop_s", cfg.window_s);
        cfg.correlator = correlation_method_from_string(j.value("correlator", "gcc_phat"));
        cfg.srp_grid_step_m = j.value("srp_grid_step_m", 0.5);
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            cfg.solver.learning_rate = s.value("learning_rate", cfg.solver.learning_rate);
            cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
            cfg.solver.grad_tol = s.value("grad_tol", cfg.solver.grad_tol);
            cfg.solver.step_tol = s.value("step_tol", cfg.solver.step_tol);
        }
        if (j.contains("mfcc")) {
            const auto& m = j.at("mfcc");
            cfg.mfcc.n_fft = m.value("n_fft", cfg.mfcc.n_fft);
            cfg.mfcc.hop = m.value("hop", cfg.mfcc.hop);
            cfg.mfcc.n_filters = m.value("n_filters", cfg.mfcc.n_filters);
            cfg.mfcc.n_mfcc = m.value("n_mfcc", cfg.mfcc.n_mfcc);
        }
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "config JSON missing fields: " + std::string(e.what()));
    }

    if (cfg.threshold < 0.0 || cfg.threshold > 1.0)
        raise(Errc::config, "detection threshold must be in [0, 1]");
    if (cfg.window_s <= 0 || cfg.hop_s <= 0 || cfg.hop_s > cfg.window_s)
        raise(Errc::config, "window/hop must satisfy 0 < hop <= window");
    if (cfg.detector.type == DetectorChoice::Type::energy && cfg.detector.rms_threshold <= 0)
        raise(Errc::config, "energy rms_threshold must be positive");
    if (cfg.correlator == CorrelationMethod::direct)
        raise(Errc::config, "pipeline correlator must be gcc or gcc_phat");
    if (!fs::exists(cfg.geometry_path))
        raise(Errc::config, "geometry file does not exist: " + cfg.geometry_path);
    if (cfg.detector.type == DetectorChoice::Type::logistic && !fs::exists(cfg.detector.model_path))
        raise(Errc::config, "model file does not exist: " + cfg.detector.model_path);
    return cfg;
}

std::string feature_fingerprint(const TrainConfig& cfg) {
    MfccMatrix probe;
    probe.config = cfg.mfcc;
    probe.sample_rate_hz = kPipelineSampleRateHz;
    return probe.fingerprint() + "|fix=" + std::to_string(cfg.clip_seconds) + "s|pool=mean_std";
}

namespace {

FeatureVector clip_features(const AudioClip& clip, const MfccConfig& cfg) {
    return summarize(mfcc(clip, cfg));
}

double detect_score(const AudioClip& reference, const PipelineConfig& config,
                    const LogisticModel* model) {
    if (config.detector.type == DetectorChoice::Type::energy)
        return energy_detect(reference, config.detector.rms_threshold).score;
    return predict(*model, clip_features(reference, config.mfcc));
}

} // namespace

WindowResult process_window(const MultichannelRecording& window, const Geometry& geometry,
                            const PipelineConfig& config, const LogisticModel* model,
                            int window_index, double start_s, bool force_localize) {
    WindowResult result;

    // reference channel = lowest mic id
    std::size_t ref = 0;
    for (std::size_t i = 1; i < window.channel_ids.size(); ++i)
        if (window.channel_ids[i] < window.channel_ids[ref]) ref = i;

    result.detection.window_index = window_index;
    result.detection.start_s = start_s;
    result.detection.end_s = start_s + config.window_s;
    result.detection.score = detect_score(window.channels[ref], config, model);
    result.detection.is_scream = result.detection.score >= config.threshold;
    result.detection.detector_name =
        config.detector.type == DetectorChoice::Type::energy ? "energy" : "logistic";

    if (!result.detection.is_scream && !force_localize) return result;

    result.curves = pair_correlations(window, geometry.array, config.correlator, geometry.c);
    result.taus.reserve(result.curves.size());
    for (const auto& pc : result.curves) {
        const double dist = distance(geometry.array.mics[geometry.array.index_of(pc.mic_i)].pos,
                                     geometry.array.mics[geometry.array.index_of(pc.mic_j)].pos);
        TdoaMeasurement m;
        if (pc.gcc.degenerate) {
            result.degenerate_correlation = true;
            m.tau_s = 0.0;
            m.weight = 0.0; // carries no information
            m.peak_sharpness = 1.0;
        } else {
            m = pick_tdoa(pc.gcc, dist, geometry.c);
        }
        m.mic_i = pc.mic_i;
        m.mic_j = pc.mic_j;
        result.taus.push_back(std::move(m));
    }

    result.init = srp_phat_init(result.curves, geometry.array, geometry.bounds,
                                config.srp_grid_step_m, geometry.c);
    SolverOptions solver = config.solver;
    solver.c = geometry.c;
    result.estimate = gradient_descent_localize(result.init.position, result.taus, geometry.array,
                                                solver);
    result.localized = true;
    return result;
}

namespace {

nlohmann::json alert_json(const WindowResult& w) {
    nlohmann::json taus = nlohmann::json::array();
    for (const auto& t : w.taus)
        taus.push_back({{"i", t.mic_i},
                        {"j", t.mic_j},
                        {"tau_s", t.tau_s},
                        {"weight", t.weight},
                        {"peak_sharpness", t.peak_sharpness}});
    return {{"schema_version", kAlertSchemaVersion},
            {"window_index", w.detection.window_index},
            {"start_s", w.detection.start_s},
            {"end_s", w.detection.end_s},
            {"score", w.detection.score},
            {"detector", w.detection.detector_name},
            {"position",
             {{"x", w.estimate.position.x}, {"y", w.estimate.position.y}, {"z", w.estimate.position.z}}},
            {"final_loss", w.estimate.final_loss},
            {"iterations", w.estimate.iterations},
            {"converged", w.estimate.converged},
            {"srp_power", w.init.power},
            {"degenerate_correlation", w.degenerate_correlation},
            {"taus", taus}};
}

RunSummary run_pipeline_impl(const PipelineConfig& config, const std::vector<std::string>& wav_paths,
                             const std::string& scene_path, bool force_localize,
                             const std::string& out_dir_override) {
    const Geometry geometry = load_geometry(config.geometry_path);

    LogisticModel model;
    const LogisticModel* model_ptr = nullptr;
    if (config.detector.type == DetectorChoice::Type::logistic) {
        model = load_model(config.detector.model_path);
        model_ptr = &model;
    }

    if (wav_paths.empty() == scene_path.empty())
        raise(Errc::config, "provide either per-mic WAV inputs or a scene file");

    MultichannelRecording rec;
    if (!scene_path.empty()) {
        const Scene scene = load_scene(scene_path);
        for (const auto& m : scene.array.mics)
            if (geometry.array.index_of(m.id) < 0)
                raise(Errc::geometry_mismatch, "scene mic " + m.id + " not in geometry");
        if (scene.array.mics.size() != geometry.array.mics.size())
            raise(Errc::geometry_mismatch, "scene/geometry channel count mismatch");
        rec = simulate(scene).first;
    } else {
        if (wav_paths.size() != geometry.array.mics.size())
            raise(Errc::geometry_mismatch,
                  "got " + std::to_string(wav_paths.size()) + " inputs for " +
                      std::to_string(geometry.array.mics.size()) + " microphones");
        for (std::size_t i = 0; i < wav_paths.size(); ++i) {
            rec.channels.push_back(load_wav(wav_paths[i]));
            rec.channel_ids.push_back(geometry.array.mics[i].id);
        }
    }

    // canonical form: 16 kHz, equal lengths
    std::size_t max_len = 0;
    for (auto& ch : rec.channels) {
        ch = resample(ch, kPipelineSampleRateHz);
        max_len = std::max(max_len, ch.samples.size());
    }
    for (auto& ch : rec.channels) ch.samples.resize(max_len, 0.0);
    rec.validate();

    const std::string out_dir = out_dir_override.empty() ? config.output_dir : out_dir_override;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/correlations");
    fs::create_directories(out_dir + "/descent");

    std::ofstream alerts(out_dir + "/alerts.jsonl", std::ios::trunc);
    if (!alerts) raise(Errc::config, "cannot write alerts under " + out_dir);

    std::vector<std::vector<AudioClip>> segmented;
    segmented.reserve(rec.channels.size());
    for (const auto& ch : rec.channels)
        segmented.push_back(segment_stream(ch, config.window_s, config.hop_s));
    const std::size_t n_windows = segmented[0].size();

    RunSummary summary;
    summary.windows = static_cast<int>(n_windows);
    summary.out_dir = out_dir;

    for (std::size_t w = 0; w < n_windows; ++w) {
        MultichannelRecording window;
        window.channel_ids = rec.channel_ids;
        for (const auto& seg : segmented) window.channels.push_back(seg[w]);

        const double start_s = static_cast<double>(w) * config.hop_s;
        const WindowResult r = process_window(window, geometry, config, model_ptr,
                                              static_cast<int>(w), start_s, force_localize);
        if (!r.localized) continue;

        alerts << alert_json(r).dump() << "\n";
        ++summary.alerts;
        for (const auto& pc : r.curves)
            write_correlation_csv(pc.gcc, out_dir + "/correlations/" + std::to_string(w) + "_" +
                                              pc.mic_i + "_" + pc.mic_j + ".csv");
        write_descent_csv(r.estimate, out_dir + "/descent/" + std::to_string(w) + ".csv");
    }
    alerts.close();

    nlohmann::json js;
    js["schema_version"] = kAlertSchemaVersion;
    js["windows"] = summary.windows;
    js["alerts"] = summary.alerts;
    js["window_s"] = config.window_s;
    js["hop_s"] = config.hop_s;
    js["threshold"] = config.threshold;
    js["correlator"] = to_string(config.correlator);
    js["detector"] = config.detector.type == DetectorChoice::Type::energy ? "energy" : "logistic";
    js["sample_rate_hz"] = kPipelineSampleRateHz;
    js["force_localize"] = force_localize;
    std::ofstream sf(out_dir + "/summary.json", std::ios::trunc);
    sf << js.dump(2) << "\n";
    return summary;
}

} // namespace

RunSummary run_pipeline(const PipelineConfig& config, const std::vector<std::string>& wav_paths,
                        const std::string& scene_path, bool force_localize,
                        const std::string& out_dir_override) {
    try {
        return run_pipeline_impl(config, wav_paths, scene_path, force_localize, out_dir_override);
    } catch (const Error& e) {
        RunSummary s;
        s.exit_code = exit_code_for(e.code());
        s.error = e.what();
        return s;
    } catch (const std::exception& e) {
        RunSummary s;
        s.exit_code = 1;
        s.error = e.what();
        return s;
    }
}

bool in_train_split(const std::string& basename) {
    // FNV-1a, 64-bit
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : basename) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h % 5 != 0; // 80% train
}

LabeledFeatures load_labeled_features(const std::string& data_dir, const TrainConfig& cfg) {
    LabeledFeatures out;
    const std::pair<const char*, int> classes[] = {{"non_scream", 0}, {"scream", 1}};
    for (const auto& [sub, label] : classes) {
        const fs::path dir = fs::path(data_dir) / sub;
        if (!fs::exists(dir))
            raise(Errc::data, "missing class directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".wav")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) raise(Errc::data, "no wav files under " + dir.string());
        for (const auto& file : files) {
            AudioClip clip = load_wav(file.string());
            clip = resample(clip, kPipelineSampleRateHz);
            clip = fix_duration(clip, cfg.clip_seconds);
            out.features.push_back(summarize(mfcc(clip, cfg.mfcc)));
            out.labels.push_back(label);
            out.basenames.push_back(file.filename().string());
        }
    }
    return out;
}

LogisticModel train_from_directory(const std::string& data_dir, const TrainConfig& cfg) {
    const LabeledFeatures data = load_labeled_features(data_dir, cfg);
    LogisticModel model =
        train_logistic(data.features, data.labels, cfg.epochs, cfg.learning_rate);
    model.config_fingerprint = feature_fingerprint(cfg);
    return model;
}

EvaluationOutcome evaluate_detector(const std::string& data_dir, const TrainConfig& cfg,
                                    const std::string& metrics_out_path) {
    const LabeledFeatures data = load_labeled_features(data_dir, cfg);

    std::vector<FeatureVector> train_x, test_x;
    std::vector<int> train_y, test_y;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        if (in_train_split(data.basenames[i])) {
            train_x.push_back(data.features[i]);
            train_y.push_back(data.labels[i]);
        } else {
            test_x.push_back(data.features[i]);
            test_y.push_back(data.labels[i]);
        }
    }
    const auto has_both = [](const std::vector<int>& y) {
        return std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
    };
    if (!has_both(train_y) || !has_both(test_y))
        raise(Errc::data, "a split side is missing one class; need more files");

    EvaluationOutcome outcome;
    outcome.model = train_logistic(train_x, train_y, cfg.epochs, cfg.learning_rate);
    outcome.model.config_fingerprint = feature_fingerprint(cfg);
    outcome.n_train = static_cast<int>(train_x.size());
    outcome.n_test = static_cast<int>(test_x.size());

    std::vector<double> scores;
    scores.reserve(test_x.size());
    for (const auto& x : test_x) scores.push_back(predict(outcome.model, x));
    outcome.metrics = evaluate(scores, test_y, 0.5);

    if (!metrics_out_path.empty()) {
        const MetricsReport& m = outcome.metrics;
        nlohmann::json j;
        j["counts"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
        j["accuracy"] = m.accuracy;
        j["scream"] = {{"precision", m.scream.precision},
                       {"recall", m.scream.recall},
                       {"f1", m.scream.f1}};
        j["non_scream"] = {{"precision", m.non_scream.precision},
                           {"recall", m.non_scream.recall},
                           {"f1", m.non_scream.f1}};
        j["eer"] = m.eer;
        j["eer_threshold"] = m.eer_threshold;
        j["n_train"] = outcome.n_train;
        j["n_test"] = outcome.n_test;
        j["fingerprint"] = outcome.model.config_fingerprint;
        std::ofstream f(metrics_out_path, std::ios::trunc);
        if (!f) raise(Errc::data, "cannot write metrics: " + metrics_out_path);
        f << j.dump(2) << "\n";
    }
    return outcome;
}

} // namespace screamloc
