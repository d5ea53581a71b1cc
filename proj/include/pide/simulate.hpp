#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "pide/model.hpp"
#include "pide/rng.hpp"
#include "pide/time_grid.hpp"

namespace pide {

/// Draws one initial state into `out`.
using InitSampler = std::function<void(RngEngine& rng, std::span<double> out)>;

InitSampler uniform_box_sampler(Box box);
InitSampler point_sampler(std::vector<double> x);

/// K simulated trajectories on a time grid with first-exit tracking.
/// Paths are frozen (absorbed) from the first grid point outside the domain
/// onward; exit_index(k) is that grid index, or kNoExit when the path stays
/// inside through t_M.
class PathBatch {
public:
    static constexpr std::size_t kNoExit = std::numeric_limits<std::size_t>::max();

    PathBatch(TimeGrid grid, std::size_t k_paths, std::size_t dim);

    std::size_t paths() const { return k_paths_; }
    std::size_t dim() const { return dim_; }
    const TimeGrid& grid() const { return grid_; }

    std::span<const double> state(std::size_t k, std::size_t m) const {
        return {states_.data() + (k * (grid_.steps() + 1) + m) * dim_, dim_};
    }
    std::span<double> state(std::size_t k, std::size_t m) {
        return {states_.data() + (k * (grid_.steps() + 1) + m) * dim_, dim_};
    }
    std::span<const double> init(std::size_t k) const { return state(k, 0); }

    std::size_t exit_index(std::size_t k) const { return exit_index_[k]; }
    void set_exit_index(std::size_t k, std::size_t m) { exit_index_[k] = m; }
    bool exited(std::size_t k) const { return exit_index_[k] != kNoExit; }

    /// Grid index of T ∧ τ for path k: exit index when exited, else M.
    std::size_t stop_index(std::size_t k) const {
        return exited(k) ? exit_index_[k] : grid_.steps();
    }

    void write_csv(std::ostream& os, std::size_t max_paths = kNoExit) const;

private:
    TimeGrid grid_;
    std::size_t k_paths_;
    std::size_t dim_;
    std::vector<double> states_;
    std::vector<std::size_t> exit_index_;
};

struct SimulationError : std::runtime_error {
    SimulationError(std::size_t path, std::size_t step, const std::string& what);
    std::size_t path;
    std::size_t step;
};

/// Explicit Euler-Maruyama with per-step compound-Poisson jump aggregation.
/// Gaussian increments are sqrt(dt) N(0,I) mapped through sigma(t_{m-1}, X_{m-1});
/// jump counts are Poisson(rate dt) with the rate and loading frozen at the
/// left endpoint; a component's aggregate mark per coordinate is a single
/// Gamma(n*shape, rate) draw. Compensated components subtract
/// rate * loading(mean mark) * dt. Path k draws from a stream derived from
/// (master_seed, path_offset + k) only, so results are identical for any
/// thread count and batches can be produced in chunks.
PathBatch simulate_paths(const ModelSpec& model, const Domain& domain, const InitSampler& init,
                         const TimeGrid& grid, std::size_t k_paths, std::uint64_t master_seed,
                         int n_threads = 0, std::uint64_t path_offset = 0);

}  // namespace pide
