#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "screamloc/errors.hpp"
#include "screamloc/pipeline.hpp"
#include "screamloc/simulator.hpp"

namespace {

int exit_code_for(screamloc::Errc code) {
    using screamloc::Errc;
    switch (code) {
        case Errc::config:
        case Errc::file_not_found:
        case Errc::unsupported_format:
        case Errc::corrupt_header:
        case Errc::invalid_input:
            return 2;
        case Errc::geometry_mismatch:
        case Errc::id_mismatch:
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

int main(int argc, char** argv) {
    CLI::App app{"scream detection and sound-source localization pipeline"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "detect and localize over WAV inputs or a scene");
    std::string config_path, scene_path, out_dir;
    std::vector<std::string> inputs;
    bool force_localize = false;
    run->add_option("--config", config_path, "pipeline config JSON")->required();
    run->add_option("--inputs", inputs, "per-mic WAV files, geometry order");
    run->add_option("--scene", scene_path, "scene JSON to simulate instead of WAV inputs");
    run->add_flag("--force-localize", force_localize, "localize every window regardless of score");
    run->add_option("--out", out_dir, "output directory (overrides config)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "synthesize a scene to per-mic WAVs + truth.json");
    std::string sim_scene, sim_out;
    sim->add_option("--scene", sim_scene, "scene JSON")->required();
    sim->add_option("--out", sim_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "train the logistic detector on a labeled directory");
    std::string train_data, train_out;
    double train_seconds = 10.0;
    int train_epochs = 400;
    double train_lr = 0.05;
    train->add_option("--data", train_data, "directory with scream/ and non_scream/")->required();
    train->add_option("--out", train_out, "model JSON path")->required();
    train->add_option("--clip-seconds", train_seconds, "pad/truncate clips to this length");
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--learning-rate", train_lr, "gradient step size");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "80/20 split, train and report detection metrics");
    std::string eval_data, eval_model, eval_out = "metrics.json";
    double eval_seconds = 10.0;
    int eval_epochs = 400;
    double eval_lr = 0.05;
    eval->add_option("--data", eval_data, "directory with scream/ and non_scream/")->required();
    eval->add_option("--model", eval_model, "also save the trained model here");
    eval->add_option("--out", eval_out, "metrics JSON path");
    eval->add_option("--clip-seconds", eval_seconds, "pad/truncate clips to this length");
    eval->add_option("--epochs", eval_epochs, "training epochs");
    eval->add_option("--learning-rate", eval_lr, "gradient step size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = screamloc::load_pipeline_config(config_path);
            const auto summary =
                screamloc::run_pipeline(cfg, inputs, scene_path, force_localize, out_dir);
            if (summary.exit_code != 0) {
                std::cerr << "error: " << summary.error << "\n";
                return summary.exit_code;
            }
            std::cout << summary.windows << " windows, " << summary.alerts << " alerts -> "
                      << summary.out_dir << "\n";
            return 0;
        }
        if (*sim) {
            const auto scene = screamloc::load_scene(sim_scene);
            const auto [rec, truth] = screamloc::simulate(scene);
            screamloc::save_simulation(scene, rec, truth, sim_out);
            std::cout << rec.channels.size() << " channels -> " << sim_out << "\n";
            return 0;
        }
        if (*train) {
            screamloc::TrainConfig cfg;
            cfg.clip_seconds = train_seconds;
            cfg.epochs = train_epochs;
            cfg.learning_rate = train_lr;
            const auto model = screamloc::train_from_directory(train_data, cfg);
            screamloc::save_model(model, train_out);
            std::cout << "model(" << model.dim() << " features) -> " << train_out << "\n";
            return 0;
        }
        if (*eval) {
            screamloc::TrainConfig cfg;
            cfg.clip_seconds = eval_seconds;
            cfg.epochs = eval_epochs;
            cfg.learning_rate = eval_lr;
            const auto outcome = screamloc::evaluate_detector(eval_data, cfg, eval_out);
            if (!eval_model.empty()) screamloc::save_model(outcome.model, eval_model);
            std::printf("accuracy %.4f  scream F1 %.4f  non-scream F1 %.4f  EER %.4f -> %s\n",
                        outcome.metrics.accuracy, outcome.metrics.scream.f1,
                        outcome.metrics.non_scream.f1, outcome.metrics.eer, eval_out.c_str());
            return 0;
        }
    } catch (const screamloc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
