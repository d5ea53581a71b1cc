// Experiment runner: solve the built-in PIDE case studies, verify against
// Monte-Carlo or closed-form references and emit plot-ready CSV artifacts.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "pide/experiment.hpp"
#include "pide/version.hpp"

namespace {

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pide: deep-learning solvers for jump-diffusion PIDE case studies"};
    app.set_version_flag("--version", std::string(pide::kVersion));
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    std::string config_path;
    std::string out_dir_flag;
    long seed_flag = -1;
    auto* run = app.add_subcommand("run", "solve a configured experiment and write artifacts");
    run->add_option("config", config_path, "experiment config file (key = value lines)")->required();
    run->add_option("--out-dir", out_dir_flag, "output directory (overrides config and PIDE_OUT_DIR)");
    run->add_option("--seed", seed_flag, "override the experiment seed");

    // mc -------------------------------------------------------------------
    pide::McCommand mc;
    std::vector<std::string> point_args;
    std::string cache_dir;
    auto* mc_cmd = app.add_subcommand("mc", "Monte-Carlo reference values for a linear case");
    mc_cmd->add_option("--case", mc.case_name, "case name (reinsurance | ruin3)")->required();
    mc_cmd->add_option("--point", point_args, "evaluation point, comma separated coordinates")->required();
    mc_cmd->add_option("--n-paths", mc.n_paths, "simulated paths per point");
    mc_cmd->add_option("--seed", mc.seed, "master seed");
    mc_cmd->add_option("--sim-steps", mc.sim_steps, "Euler steps on [0, T]");
    mc_cmd->add_option("--out", mc.out_file, "output CSV");
    mc_cmd->add_option("--cache", cache_dir, "cache directory (reused across invocations)");

    // report ----------------------------------------------------------------
    std::string report_dir;
    auto* report = app.add_subcommand("report", "recompute and gate the error metrics of a run");
    report->add_option("dir", report_dir, "run directory produced by `run`")->required();

    auto* list = app.add_subcommand("list-cases", "print the registered case names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pide::kExitUsage;
    }

    try {
        if (*run) {
            pide::ExperimentConfig cfg = pide::ExperimentConfig::parse_file(config_path);
            if (const char* env = std::getenv("PIDE_OUT_DIR"); env && out_dir_flag.empty())
                cfg.out_dir = env;
            if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;
            if (seed_flag >= 0) cfg.overrides["seed"] = std::to_string(seed_flag);
            return pide::run_experiment(cfg, std::cout);
        }
        if (*mc_cmd) {
            for (const auto& text : point_args) mc.points.push_back(parse_point(text));
            if (!cache_dir.empty()) mc.cache_dir = cache_dir;
            return pide::run_mc(mc, std::cout);
        }
        if (*report) return pide::run_report(report_dir, std::cout);
        if (*list) {
            for (const auto& name : pide::case_names()) std::cout << name << "\n";
            return pide::kExitOk;
        }
    } catch (const pide::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return pide::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pide::kExitSolverFailure;
    }
    return pide::kExitUsage;
}
