// config.hpp — Versioned run configuration: single structured JSON file,
// command-line flags override file values.

#pragma once

#include <optional>
#include <string>

#include "otesim/analysis.hpp"
#include "otesim/atoms.hpp"
#include "otesim/dynamics.hpp"
#include "otesim/environment.hpp"

namespace otesim::cli {

inline constexpr int schema_version = 1;

struct EvolveConfig {
    std::optional<double> t_final;  // default 50 / min(nonzero Gamma)
    std::optional<double> dt;       // default 0.05 / ||L||
    std::string initial{"maximally_mixed"};  // or "ground"
    std::string trajectory_path;    // optional CSV of sampled populations
    int trajectory_points{200};
};

struct ScanConfig {
    double z_min_um{0.4}, z_max_um{12.0};
    int z_points{101};
    bool log_z{true};
    double dt_kelvin_min{-270.0}, dt_kelvin_max{270.0};
    int dt_points{101};
};

struct SampleConfig {
    int n{2000};
    std::uint64_t seed{7};
    analysis::SampleRanges ranges{};
    double omega2{0.6};
    double omega1_max{1.0};
    int coarse_points{64};
    std::string trace_path;  // optional optimizer trace CSV for the first draw
};

struct RunConfig {
    atoms::SystemSpec system =
        atoms::SystemSpec::make(atoms::MachineSpec::make(0.8, 0.2, 1.0, 1.0, 1.0,
                                                         atoms::MachineTransition::T2),
                                1.0, atoms::Geometry(1.0, 1.0));
    env::EnvironmentModel environment{};
    dyn::SolverOptions solver{};
    EvolveConfig evolve{};
    ScanConfig scan{};
    SampleConfig sample{};
    std::string output_path{"-"};  // "-" = stdout
    std::string output_format{"json"};

    // Dipole scales are kept so scans can rebuild systems at new geometry.
    double dipole1{1.0}, dipole2{1.0}, dipole3{1.0}, dipole_body{1.0};
};

// Parse and validate a config file. Throws ConfigError on any defect; a
// malformed config never yields a partially usable object.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");

// Flag overrides applied after the file is parsed.
struct Overrides {
    std::optional<double> z_um, r_um;
    std::optional<double> t_w_kelvin, t_s_kelvin;
    std::optional<int> sample_n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_path;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

}  // namespace otesim::cli
