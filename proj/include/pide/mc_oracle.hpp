#pragma once

#include <filesystem>
#include <optional>

#include "pide/linear_solver.hpp"

namespace pide {

/// Plain Monte-Carlo value of the discounted path functional started at a
/// fixed space-time point.
struct McEstimate {
    double t = 0.0;
    std::vector<double> x;
    double estimate = 0.0;
    double std_error = 0.0;  // unbiased sample variance over paths
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Sample mean and standard error of Y over n_paths simulations with the
/// degenerate initial condition ξ ≡ x. The grid must span [t, horizon].
/// Paths stream in fixed-size chunks; the result is independent of chunking
/// and thread count.
McEstimate mc_estimate(const LinearProblem& p, double t, std::span<const double> x, const TimeGrid& grid,
                       std::size_t n_paths, std::uint64_t seed, int n_threads = 0);

/// Elementwise mc_estimate with per-point seeds derived from (seed, index).
std::vector<McEstimate> mc_grid(const LinearProblem& p, const std::vector<std::vector<double>>& points,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                int n_threads = 0);

/// Disk cache keyed by a content hash of (problem tag, point, grid, n_paths,
/// seed). The full key string is stored alongside the value and checked on
/// lookup.
class McCache {
public:
    explicit McCache(std::filesystem::path dir);

    static std::string make_key(const std::string& problem_tag, double t, std::span<const double> x,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

    std::optional<McEstimate> lookup(const std::string& key) const;
    void store(const std::string& key, const McEstimate& e) const;

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    std::filesystem::path dir_;
    mutable std::size_t hits_ = 0;
    mutable std::size_t misses_ = 0;
};

/// mc_estimate through an optional cache (a null cache recomputes).
McEstimate mc_estimate_cached(const LinearProblem& p, const std::string& problem_tag, double t,
                              std::span<const double> x, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, const McCache* cache, int n_threads = 0);

}  // namespace pide
