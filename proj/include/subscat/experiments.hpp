#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "subscat/config.hpp"

namespace subscat {

struct RunOutputs {
    std::vector<std::filesystem::path> files;  // CSV tables and the manifest, in write order
};

// Runs one experiment and writes its tables plus manifest.json into `out`
// (created if missing). Numbers use 17 significant digits, '.' and '\n', so
// that identical inputs give byte-identical files. Throws ConfigError when
// the configuration does not fit the experiment and NumericalError when a
// computation misses its tolerance.
RunOutputs run_experiment(const ExperimentConfig& config, Experiment experiment, const std::filesystem::path& out,
                          int threads = 0);

// printf "%.17g" through std::to_chars.
std::string format_number(double value);

}  // namespace subscat
