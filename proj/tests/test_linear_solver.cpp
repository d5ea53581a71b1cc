#include <doctest.h>

#include <cmath>

#include "pide/linear_solver.hpp"

using namespace pide;

namespace {

LinearProblem brownian_martingale(double horizon) {
    LinearProblem p;
    p.model.dim = 1;
    p.model.diffusion = constant_diagonal_diffusion({1.0});
    p.domain = Domain::all_of(1);
    p.horizon = horizon;
    p.boundary = [](double, std::span<const double> x) { return x[0]; };
    p.region = Box{{-1.0}, {1.0}};
    return p;
}

LinearSolverConfig small_config(Eigen::Index dim, long epochs, bool batch_norm) {
    LinearSolverConfig cfg;
    cfg.arch = {dim, {24, 24}, Activation::kSoftplus, batch_norm, batch_norm};
    cfg.train.epochs = epochs;
    cfg.train.minibatch_size = 1024;
    const double lr0 = batch_norm ? 0.1 : 0.01;
    cfg.train.lr_schedule = scale_schedule(
        {{0, lr0}, {2000, lr0 / 10}, {4000, lr0 / 100}, {6000, lr0 / 1000}}, epochs / 10000.0);
    cfg.train.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("driftless brownian motion recovers the martingale identity") {
    LinearProblem p = brownian_martingale(0.25);
    const TimeGrid grid = TimeGrid::uniform(0.0, 0.25, 10);
    MlpNetwork net = solve_linear(p, grid, 1024, small_config(1, 3000, false));
    auto rep = relative_l1_error(as_point_fn(net), [](std::span<const double> x) { return x[0]; },
                                 uniform_box_sampler(p.region), 1, 1000, 99);
    CHECK(rep.metric == ErrorMetric::kRelativeL1);
    CHECK(rep.estimate < 0.01);
    CHECK(rep.std_error > 0.0);
}

TEST_CASE("pure running cost learns the time to maturity") {
    LinearProblem p = brownian_martingale(1.0);
    p.boundary = [](double, std::span<const double>) { return 0.0; };
    p.running = [](double, std::span<const double>) { return 1.0; };
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 10);
    MlpNetwork net = solve_linear(p, grid, 512, small_config(1, 1200, true));
    for (double x : {-0.9, -0.3, 0.0, 0.4, 0.8})
        CHECK(std::abs(net.value(std::vector<double>{x}) - 1.0) < 1e-2);
}

TEST_CASE("trained network is near the best affine fit of the same samples") {
    // Fixed dataset: the network and the ordinary-least-squares oracle see
    // identical samples, so the achievable error is the same up to training
    // slack.
    LinearProblem p = brownian_martingale(0.25);
    const TimeGrid grid = TimeGrid::uniform(0.0, 0.25, 10);
    LinearSolverConfig cfg = small_config(1, 3000, false);
    cfg.fresh_batches = false;
    MlpNetwork net = solve_linear(p, grid, 1024, cfg);

    // Rebuild the identical epoch-0 dataset by hand.
    const std::uint64_t bseed = mix_seed({cfg.train.seed, 0xBA7C5EEDull, 0});
    PathBatch batch = simulate_paths(p.model, p.domain, uniform_box_sampler(p.region), grid, 1024, bseed, 1);
    const auto y = pathwise_functional(batch, nullptr, nullptr, p.boundary);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < 1024; ++k) {
        const double xi = batch.init(k)[0];
        sx += xi;
        sy += y[k];
        sxx += xi * xi;
        sxy += xi * y[k];
    }
    const double n = 1024.0;
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    const double intercept = sy / n - slope * sx / n;

    double net_err = 0.0, affine_err = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = -1.0 + 2.0 * i / 200.0;
        net_err += std::abs(net.value(std::vector<double>{x}) - x);
        affine_err += std::abs(slope * x + intercept - x);
    }
    CHECK(net_err <= 2.0 * affine_err + 1e-3);
}

TEST_CASE("fresh batches change per epoch, fixed datasets do not") {
    LinearProblem p = brownian_martingale(0.25);
    const TimeGrid grid = TimeGrid::uniform(0.0, 0.25, 5);
    // With a vanishing learning rate the loss history reflects the data only.
    LinearSolverConfig cfg = small_config(1, 4, false);
    cfg.train.lr_schedule = {{0, 1e-300}};

    std::vector<EpochLog> fresh;
    solve_linear(p, grid, 256, cfg, &fresh);
    CHECK((fresh[0].loss != fresh[1].loss || fresh[1].loss != fresh[2].loss));

    cfg.fresh_batches = false;
    std::vector<EpochLog> fixed;
    solve_linear(p, grid, 256, cfg, &fixed);
    CHECK(fixed[0].loss == fixed[1].loss);
    CHECK(fixed[1].loss == fixed[3].loss);
}

TEST_CASE("solver rejects mismatched grids and architectures") {
    LinearProblem p = brownian_martingale(1.0);
    LinearSolverConfig cfg = small_config(1, 10, true);
    CHECK_THROWS_AS(solve_linear(p, TimeGrid::uniform(0.0, 0.5, 5), 64, cfg), std::invalid_argument);
    cfg.arch.input_dim = 2;
    CHECK_THROWS_AS(solve_linear(p, TimeGrid::uniform(0.0, 1.0, 5), 64, cfg), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// error metrics

TEST_CASE("relative error identities") {
    const InitSampler sampler = uniform_box_sampler(Box{{1.0}, {2.0}});
    const PointFn ref = [](std::span<const double> x) { return x[0]; };

    auto rep = relative_l1_error(ref, ref, sampler, 1, 500, 1);
    CHECK(rep.estimate == 0.0);

    const PointFn scaled = [](std::span<const double> x) { return 1.01 * x[0]; };
    rep = relative_l1_error(scaled, ref, sampler, 1, 500, 1);
    CHECK(rep.estimate == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(rep.std_error < 1e-12);  // the ratio is constant
    CHECK(rep.points.size() == 500);
}

TEST_CASE("absolute error identities") {
    const InitSampler sampler = uniform_box_sampler(Box{{-1.0}, {1.0}});
    const PointFn ref = [](std::span<const double> x) { return std::sin(x[0]); };
    auto rep = absolute_l1_error(ref, ref, sampler, 1, 300, 2);
    CHECK(rep.estimate == 0.0);

    const PointFn shifted = [](std::span<const double> x) { return std::sin(x[0]) + 0.3; };
    rep = absolute_l1_error(shifted, ref, sampler, 1, 300, 2);
    CHECK(rep.estimate == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("relative error excludes near-zero references and can degenerate") {
    const InitSampler sampler = uniform_box_sampler(Box{{-1.0}, {1.0}});
    const PointFn zero = [](std::span<const double>) { return 0.0; };
    const PointFn one = [](std::span<const double>) { return 1.0; };
    CHECK_THROWS_AS(relative_l1_error(one, zero, sampler, 1, 100, 3), std::runtime_error);

    // half the region has a vanishing reference
    const PointFn half = [](std::span<const double> x) { return x[0] > 0.0 ? 1.0 : 0.0; };
    auto rep = relative_l1_error(one, half, sampler, 1, 1000, 3);
    CHECK(rep.excluded_count > 400);
    CHECK(rep.excluded_count < 600);
    CHECK(rep.sample_count + rep.excluded_count == 1000);
    CHECK(rep.estimate == 0.0);
}
