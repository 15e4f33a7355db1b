#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subscat/potential.hpp"
#include "subscat/stationary.hpp"
#include "subscat/units.hpp"
#include "subscat/wavepacket.hpp"

namespace subscat {

enum class Experiment { Amplitudes, Times, PacketTrace, HartmanSweep, Larmor };

std::string experiment_name(Experiment e);
// Throws ConfigError for an unknown name.
Experiment parse_experiment(const std::string& name);

// Evenly spaced values, both ends included.
struct Grid {
    double start = 0.0;
    double stop = 0.0;
    std::size_t count = 0;
    std::vector<double> values() const;
};

// Lengths, energies and times are read in the units of the selected system:
// nm, eV and ps for "nm_ev", internal units (m = hbar = 1) for "natural".
struct ExperimentConfig {
    std::string unit_system = "nm_ev";
    double mass = 1.0;

    std::string barrier_kind = "rectangular";
    double a = 0.0;
    double b = 0.0;
    double height = 0.0;
    std::vector<Segment> segments;   // piecewise
    std::vector<double> samples;     // sampled

    std::string method = "automatic";

    std::optional<double> E0;
    std::optional<double> k0;
    double l0 = 0.0;
    std::size_t n_samples = 2048;
    double halfwidth_sigmas = 8.0;

    std::optional<Experiment> experiment;
    std::optional<Grid> time_grid;
    std::optional<Grid> energy_grid;  // amplitudes
    std::vector<double> widths;       // hartman-sweep
    std::optional<double> omega;      // larmor, hbar omega as an energy
    bool direct_larmor = true;
    std::uint64_t seed = 0;

    UnitSystem units() const;
    Barrier barrier() const;
    BasisMethod basis_method() const;
    double wavenumber() const;  // k0, from E0 when given as an energy
    SpectralProfile profile() const;
};

// Parses and validates a JSON document. Unknown keys, missing required keys,
// wrong types and invalid values raise ConfigError naming the field (and the
// line for syntax errors).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON of the resolved configuration; parse_config of the result
// reproduces the configuration exactly.
std::string serialize_config(const ExperimentConfig& config);

// "fig1", "e-half-v0" or "free"; throws ConfigError otherwise.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace subscat
