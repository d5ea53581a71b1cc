#pragma once

#include <optional>

#include "pide/functional.hpp"
#include "pide/model.hpp"
#include "pide/simulate.hpp"
#include "pide/train.hpp"

namespace pide {

/// Terminal/boundary value problem data for the regression solver. The
/// solution is learned on the sampling region `region` at time `eval_time`.
struct LinearProblem {
    ModelSpec model;
    Domain domain;
    double horizon = 1.0;
    ScalarField discount;   // r(t,x); null means 0
    ScalarField running;    // c(t,x); null means 0
    ScalarField boundary;   // g(t,x); g(T,.) is the terminal condition
    Box region;             // sampling region A
    double eval_time = 0.0;
    InitSampler init;       // defaults to uniform on region
};

struct LinearSolverConfig {
    MlpArchitecture arch;
    TrainConfig train;
    /// Fresh simulations per minibatch (default); false fixes the epoch-0
    /// dataset for exact-reproduction experiments.
    bool fresh_batches = true;
    int sim_threads = 1;
};

/// Trains U ≈ u(eval_time, ·) on the region: every minibatch draws k_paths
/// initial points, simulates to T ∧ τ and regresses the discounted path
/// functional. Returns the network in inference mode.
MlpNetwork solve_linear(const LinearProblem& p, const TimeGrid& grid, std::size_t k_paths,
                        const LinearSolverConfig& cfg, std::vector<EpochLog>* history = nullptr);

enum class ErrorMetric { kRelativeL1, kAbsoluteL1 };

struct PointRecord {
    std::vector<double> x;
    double u_net;
    double u_ref;
    bool excluded;
};

struct ErrorReport {
    ErrorMetric metric;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t sample_count = 0;
    std::size_t excluded_count = 0;  // reference below the magnitude floor
    std::vector<PointRecord> points;
};

using PointFn = std::function<double(std::span<const double> x)>;

PointFn as_point_fn(const MlpNetwork& net);  // captures by reference

/// Monte-Carlo estimate of E |U(ξ) - ref(ξ)| / |ref(ξ)|. Points where
/// |ref| < 1e-8 are excluded from the mean and counted; throws when every
/// point is excluded.
ErrorReport relative_l1_error(const PointFn& net, const PointFn& reference, const InitSampler& sampler,
                              std::size_t dim, std::size_t n_samples, std::uint64_t seed);

/// Same without the denominator (no exclusions).
ErrorReport absolute_l1_error(const PointFn& net, const PointFn& reference, const InitSampler& sampler,
                              std::size_t dim, std::size_t n_samples, std::uint64_t seed);

}  // namespace pide
