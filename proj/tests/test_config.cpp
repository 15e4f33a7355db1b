#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "subscat/config.hpp"
#include "subscat/errors.hpp"
#include "subscat/experiments.hpp"

using namespace subscat;

namespace {

const char* kMinimal = R"({
  "units": {"system": "natural", "mass": 1},
  "barrier": {"kind": "rectangular", "a": 10, "b": 12, "height": 1},
  "profile": {"k0": 1, "l0": 20, "n_samples": 64},
  "energy_grid": {"start": 0.1, "stop": 2.0, "count": 5}
})";

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("every preset survives a serialize and parse round trip") {
    for (const auto& name : preset_names()) {
        const ExperimentConfig cfg = preset(name);
        const std::string once = serialize_config(cfg);
        CHECK(serialize_config(parse_config(once)) == once);
    }
}

TEST_CASE("fig1 preset resolves the effective mass from the free transit time") {
    const ExperimentConfig cfg = preset("fig1");
    const UnitSystem u = cfg.units();
    // m d / (hbar k0) for d = 15 nm at E0 = 0.05 eV and m = 0.067 m_e
    const double tau = u.mass_over_hbar() * u.from_nm(15.0) / cfg.wavenumber();
    CHECK(u.to_ps(tau) == doctest::Approx(0.029276).epsilon(1e-4));
}

TEST_CASE("invalid configurations name the offending field") {
    CHECK(error_of(kMinimal).empty());
    std::string unknown = kMinimal;
    unknown.replace(unknown.find("\"height\""), 8, "\"heigth\"");
    CHECK(error_of(unknown).find("heigth") != std::string::npos);

    std::string inverted = kMinimal;
    inverted.replace(inverted.find("\"b\": 12"), 7, "\"b\": 9");
    CHECK_FALSE(error_of(inverted).empty());

    CHECK(error_of("{\n  \"units\": {,\n}").find("line") != std::string::npos);
    CHECK_THROWS_AS(preset("nonexistent"), ConfigError);
    CHECK_THROWS_AS(parse_experiment("tunnel"), ConfigError);
}

TEST_CASE("amplitudes experiment writes deterministic tables") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "subscat_test_config";
    fs::remove_all(dir);
    const ExperimentConfig cfg = parse_config(kMinimal);
    auto first = run_experiment(cfg, Experiment::Amplitudes, dir / "a", 1);
    auto second = run_experiment(cfg, Experiment::Amplitudes, dir / "b", 1);
    REQUIRE(first.files.size() == second.files.size());
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    };
    for (std::size_t i = 0; i < first.files.size(); ++i)
        CHECK(slurp(first.files[i]) == slurp(second.files[i]));
    ExperimentConfig tagged = cfg;
    tagged.experiment = Experiment::Amplitudes;
    CHECK_THROWS_AS(run_experiment(tagged, Experiment::HartmanSweep, dir / "c", 1), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("number formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_number(v)) == v);
}
