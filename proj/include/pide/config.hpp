#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace pide {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Experiment request: a case name, a scale profile and flat overrides.
/// Config files are UTF-8 `key = value` lines with `#` comments.
struct ExperimentConfig {
    std::string case_name;
    std::string profile = "desk";
    std::map<std::string, std::string> overrides;
    std::filesystem::path out_dir = "runs";

    static ExperimentConfig parse_file(const std::filesystem::path& file);
    static ExperimentConfig parse_text(const std::string& text, const std::string& origin);
};

/// Fully resolved experiment settings (profile defaults plus overrides).
struct ResolvedSettings {
    std::string case_name;
    std::string profile;
    std::uint64_t seed = 1;
    long epochs = 0;
    long batch = 0;
    long hidden = 0;
    std::string activation;
    std::string rule = "midpoint";
    std::size_t sim_steps = 50;        // Euler steps of the linear solves
    std::size_t splitting_steps = 10;  // N
    std::size_t sub_steps = 5;         // Euler steps per splitting interval
    std::size_t dim = 0;               // regulator state dimension
    std::size_t mc_paths = 0;
    std::uint64_t mc_seed = 777;
    std::size_t eval_points = 0;
    double margin_sigmas = 3.0;
    std::string gamma_convention = "shape-rate";
    bool fresh_batches = true;
    bool sections = true;  // emit figure-section CSVs on linear cases
    long dump_paths = 0;   // debug CSV with this many simulated paths
    int threads = 0;

    /// Applies profile defaults for the case, then overrides; rejects
    /// unknown keys and malformed values.
    static ResolvedSettings resolve(const ExperimentConfig& cfg);

    std::map<std::string, std::string> as_map() const;
};

}  // namespace pide
