#pragma once

#include <iosfwd>

#include "pide/case_studies.hpp"
#include "pide/config.hpp"
#include "pide/mc_oracle.hpp"

namespace pide {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitUsage = 2;

/// Solves the configured case and writes manifest, checkpoints, training
/// logs, evaluation CSVs and an error report under cfg.out_dir.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

struct McCommand {
    std::string case_name;
    std::vector<std::vector<double>> points;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 777;
    std::size_t sim_steps = 50;
    std::filesystem::path out_file = "mc.csv";
    std::filesystem::path cache_dir;  // empty disables caching
    std::string gamma_convention = "shape-rate";
};

/// Monte-Carlo reference values for a linear case at fixed points.
int run_mc(const McCommand& cmd, std::ostream& log);

/// Recomputes the error metrics of a finished run from its artifacts,
/// verifies checkpoint integrity and prints pass/fail per case tolerance.
int run_report(const std::filesystem::path& run_dir, std::ostream& out);

// Shared with the acceptance suite.
TrainConfig make_train_config(const ResolvedSettings& s);
LinearProblem make_linear_problem(const ResolvedSettings& s);
SemilinearProblem make_semilinear_problem(const ResolvedSettings& s);

}  // namespace pide
