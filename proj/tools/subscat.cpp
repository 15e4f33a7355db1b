#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subscat/config.hpp"
#include "subscat/errors.hpp"
#include "subscat/experiments.hpp"
#include "subscat/parallel.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace subscat;
    CLI::App app{"Subprocess decomposition of 1D scattering and its characteristic times"};
    app.set_version_flag("--version", std::string(SUBSCAT_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::string preset_name;

    const std::vector<Experiment> experiments{Experiment::Amplitudes, Experiment::Times, Experiment::PacketTrace,
                                              Experiment::HartmanSweep, Experiment::Larmor};
    std::vector<CLI::App*> verbs;
    for (Experiment e : experiments) {
        CLI::App* sub = app.add_subcommand(experiment_name(e), "run the " + experiment_name(e) + " experiment");
        sub->add_option("--config", config_path, "JSON experiment configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
        verbs.push_back(sub);
    }
    CLI::App* preset_cmd = app.add_subcommand("preset", "write a named configuration and run its experiment");
    preset_cmd->add_option("name", preset_name, "fig1, e-half-v0 or free")->required();
    preset_cmd->add_option("--out", out_dir, "output directory");
    preset_cmd->add_option("--threads", threads, "worker threads (0: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        set_default_threads(threads);
        if (preset_cmd->parsed()) {
            ExperimentConfig cfg = preset(preset_name);
            std::filesystem::create_directories(out_dir);
            {
                std::ofstream f(std::filesystem::path(out_dir) / (preset_name + ".json"), std::ios::binary);
                if (!f) throw ConfigError("cannot write the preset configuration into " + out_dir);
                f << serialize_config(cfg);
            }
            auto res = run_experiment(cfg, *cfg.experiment, out_dir, threads);
            for (const auto& p : res.files) std::cout << p.string() << '\n';
            return 0;
        }
        for (std::size_t i = 0; i < verbs.size(); ++i) {
            if (!verbs[i]->parsed()) continue;
            ExperimentConfig cfg = load_config(config_path);
            auto res = run_experiment(cfg, experiments[i], out_dir, threads);
            for (const auto& p : res.files) std::cout << p.string() << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
