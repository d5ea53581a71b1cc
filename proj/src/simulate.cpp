#include "pide/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pide/parallel.hpp"

namespace pide {

InitSampler uniform_box_sampler(Box box) {
    return [box = std::move(box)](RngEngine& rng, std::span<double> out) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
    };
}

InitSampler point_sampler(std::vector<double> x) {
    return [x = std::move(x)](RngEngine&, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    };
}

PathBatch::PathBatch(TimeGrid grid, std::size_t k_paths, std::size_t dim)
    : grid_(std::move(grid)),
      k_paths_(k_paths),
      dim_(dim),
      states_(k_paths * (grid_.steps() + 1) * dim),
      exit_index_(k_paths, kNoExit) {}

void PathBatch::write_csv(std::ostream& os, std::size_t max_paths) const {
    os << "path,m,t";
    for (std::size_t i = 1; i <= dim_; ++i) os << ",x_" << i;
    os << ",exited\n";
    char buf[32];
    const std::size_t kmax = std::min(max_paths, k_paths_);
    for (std::size_t k = 0; k < kmax; ++k) {
        for (std::size_t m = 0; m <= grid_.steps(); ++m) {
            os << k << ',' << m << ',';
            std::snprintf(buf, sizeof buf, "%.17g", grid_.points[m]);
            os << buf;
            for (double v : state(k, m)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                os << ',' << buf;
            }
            os << ',' << (m >= exit_index_[k] ? 1 : 0) << '\n';
        }
    }
}

SimulationError::SimulationError(std::size_t path_, std::size_t step_, const std::string& what_)
    : std::runtime_error("simulation error at path " + std::to_string(path_) + ", step " +
                         std::to_string(step_) + ": " + what_),
      path(path_),
      step(step_) {}

namespace {

bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

// Simulates paths [k_lo, k_hi) into the batch.
void simulate_range(const ModelSpec& model, const Domain& domain, const InitSampler& init,
                    PathBatch& batch, std::size_t k_lo, std::size_t k_hi, std::uint64_t master_seed,
                    std::uint64_t path_offset) {
    const TimeGrid& grid = batch.grid();
    const std::size_t d = model.dim;
    const std::size_t steps = grid.steps();

    std::vector<double> drift(d), sigma(d * d), disp(d), mean_marks, marks;
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (std::size_t k = k_lo; k < k_hi; ++k) {
        RngEngine rng = make_stream(master_seed, path_offset + k);
        auto x0 = batch.state(k, 0);
        init(rng, x0);
        if (!all_finite(x0)) throw SimulationError(k, 0, "non-finite initial state");
        bool inside = domain.contains(x0);
        if (!inside) batch.set_exit_index(k, 0);

        for (std::size_t m = 1; m <= steps; ++m) {
            auto prev = batch.state(k, m - 1);
            auto next = batch.state(k, m);
            if (!inside) {  // absorbed at the exit value
                std::copy(prev.begin(), prev.end(), next.begin());
                continue;
            }
            const double t_prev = grid.points[m - 1];
            const double dt = grid.dt(m);
            const double sqdt = std::sqrt(dt);

            std::copy(prev.begin(), prev.end(), next.begin());
            if (model.drift) {
                model.drift(t_prev, prev, drift);
                for (std::size_t i = 0; i < d; ++i) next[i] += drift[i] * dt;
            }
            if (model.diffusion) {
                model.diffusion(t_prev, prev, sigma);
                for (std::size_t j = 0; j < d; ++j) {
                    const double dw = sqdt * gauss(rng);
                    for (std::size_t i = 0; i < d; ++i) next[i] += sigma[i * d + j] * dw;
                }
            }
            for (const auto& jump : model.jumps) {
                const double rate = jump.rate_at(t_prev, prev);
                const long n = sample_poisson_count(rate, dt, rng);
                if (n > 0) {
                    marks.resize(jump.marks.size());
                    for (std::size_t q = 0; q < jump.marks.size(); ++q)
                        marks[q] = sample_gamma_one(static_cast<double>(n) * jump.marks[q].shape,
                                                    jump.marks[q].rate, rng);
                    jump.loading(t_prev, prev, marks, disp);
                    for (std::size_t i = 0; i < d; ++i) next[i] += disp[i];
                }
                if (jump.compensated && rate > 0.0) {
                    mean_marks.resize(jump.marks.size());
                    for (std::size_t q = 0; q < jump.marks.size(); ++q) mean_marks[q] = jump.marks[q].mean();
                    jump.loading(t_prev, prev, mean_marks, disp);
                    for (std::size_t i = 0; i < d; ++i) next[i] -= rate * dt * disp[i];
                }
            }
            if (model.post_step) model.post_step(grid.points[m], next);
            if (!all_finite(next)) throw SimulationError(k, m, "non-finite state");
            if (!domain.contains(next)) {
                batch.set_exit_index(k, m);
                inside = false;
            }
        }
    }
}

}  // namespace

PathBatch simulate_paths(const ModelSpec& model, const Domain& domain, const InitSampler& init,
                         const TimeGrid& grid, std::size_t k_paths, std::uint64_t master_seed,
                         int n_threads, std::uint64_t path_offset) {
    model.validate();
    if (k_paths == 0) throw std::invalid_argument("simulate_paths: k_paths must be >= 1");
    PathBatch batch(grid, k_paths, model.dim);
    parallel_for(
        0, k_paths,
        [&](std::size_t lo, std::size_t hi) {
            simulate_range(model, domain, init, batch, lo, hi, master_seed, path_offset);
        },
        n_threads);
    return batch;
}

}  // namespace pide
