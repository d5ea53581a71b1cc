#include "pide/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pide/case_studies.hpp"

namespace pide {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "case",       "profile",       "seed",          "epochs",           "batch",
        "hidden",     "activation",    "rule",          "sim_steps",        "splitting_steps",
        "sub_steps",  "dim",           "mc_paths",      "mc_seed",          "eval_points",
        "margin_sigmas", "gamma_convention", "fresh_batches", "sections",  "dump_paths",
        "threads",    "out_dir"};
    return keys;
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for '" + key + "': " + v);
    }
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (key == "case")
            cfg.case_name = value;
        else if (key == "profile")
            cfg.profile = value;
        else if (key == "out_dir")
            cfg.out_dir = value;
        else if (cfg.overrides.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        else
            cfg.overrides[key] = value;
    }
    if (cfg.case_name.empty()) throw ConfigError(origin + ": missing required key 'case'");
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open config file: " + file.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_text(text, file.string());
}

ResolvedSettings ResolvedSettings::resolve(const ExperimentConfig& cfg) {
    const auto names = case_names();
    if (std::find(names.begin(), names.end(), cfg.case_name) == names.end())
        throw ConfigError("unknown case '" + cfg.case_name + "'");
    if (cfg.profile != "desk" && cfg.profile != "paper")
        throw ConfigError("unknown profile '" + cfg.profile + "' (expected desk or paper)");

    ResolvedSettings s;
    s.case_name = cfg.case_name;
    s.profile = cfg.profile;
    const bool desk = cfg.profile == "desk";
    const bool linear = cfg.case_name == "reinsurance" || cfg.case_name == "ruin3";

    if (linear) {
        s.activation = "softplus";
        s.epochs = desk ? 4000 : 10000;
        s.batch = desk ? 1024 : (cfg.case_name == "ruin3" ? 6000 : 5000);
        s.hidden = desk ? 50 : (cfg.case_name == "ruin3" ? 100 : 50);
        s.sim_steps = desk ? 50 : 100;
        s.mc_paths = cfg.case_name == "ruin3" ? (desk ? 200000 : 2000000) : (desk ? 100000 : 1000000);
        s.eval_points = desk ? 50 : 1000;
    } else {
        s.activation = "sigmoid";
        s.epochs = desk ? 1200 : 12000;
        s.batch = desk ? 512 : 5000;
        s.hidden = desk ? 100 : 100;
        s.splitting_steps = 10;
        s.sub_steps = 5;
        s.eval_points = desk ? 10000 : 10000;
        s.dim = cfg.case_name == "regulator" ? (desk ? 2 : 4) : 2;
    }

    for (const auto& [key, value] : cfg.overrides) {
        if (key == "seed")
            s.seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "epochs")
            s.epochs = parse_long(key, value);
        else if (key == "batch")
            s.batch = parse_long(key, value);
        else if (key == "hidden")
            s.hidden = parse_long(key, value);
        else if (key == "activation")
            s.activation = value;
        else if (key == "rule")
            s.rule = value;
        else if (key == "sim_steps")
            s.sim_steps = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "splitting_steps")
            s.splitting_steps = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "sub_steps")
            s.sub_steps = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "dim")
            s.dim = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "mc_paths")
            s.mc_paths = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "mc_seed")
            s.mc_seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "eval_points")
            s.eval_points = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "margin_sigmas")
            s.margin_sigmas = parse_real(key, value);
        else if (key == "gamma_convention")
            s.gamma_convention = value;
        else if (key == "fresh_batches")
            s.fresh_batches = parse_bool(key, value);
        else if (key == "sections")
            s.sections = parse_bool(key, value);
        else if (key == "dump_paths")
            s.dump_paths = parse_long(key, value);
        else if (key == "threads")
            s.threads = static_cast<int>(parse_long(key, value));
    }

    if (s.rule != "endpoint" && s.rule != "midpoint")
        throw ConfigError("invalid rule '" + s.rule + "'");
    if (s.activation != "softplus" && s.activation != "sigmoid")
        throw ConfigError("invalid activation '" + s.activation + "'");
    if (s.gamma_convention != "shape-rate" && s.gamma_convention != "shape-scale")
        throw ConfigError("invalid gamma_convention '" + s.gamma_convention + "'");
    if (s.epochs < 1 || s.batch < 2) throw ConfigError("epochs/batch out of range");
    return s;
}

std::map<std::string, std::string> ResolvedSettings::as_map() const {
    std::map<std::string, std::string> m;
    m["case"] = case_name;
    m["profile"] = profile;
    m["seed"] = std::to_string(seed);
    m["epochs"] = std::to_string(epochs);
    m["batch"] = std::to_string(batch);
    m["hidden"] = std::to_string(hidden);
    m["activation"] = activation;
    m["rule"] = rule;
    m["sim_steps"] = std::to_string(sim_steps);
    m["splitting_steps"] = std::to_string(splitting_steps);
    m["sub_steps"] = std::to_string(sub_steps);
    m["dim"] = std::to_string(dim);
    m["mc_paths"] = std::to_string(mc_paths);
    m["mc_seed"] = std::to_string(mc_seed);
    m["eval_points"] = std::to_string(eval_points);
    m["margin_sigmas"] = std::to_string(margin_sigmas);
    m["gamma_convention"] = gamma_convention;
    m["fresh_batches"] = fresh_batches ? "1" : "0";
    m["sections"] = sections ? "1" : "0";
    m["dump_paths"] = std::to_string(dump_paths);
    m["threads"] = std::to_string(threads);
    return m;
}

}  // namespace pide
