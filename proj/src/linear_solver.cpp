#include "pide/linear_solver.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace pide {

MlpNetwork solve_linear(const LinearProblem& p, const TimeGrid& grid, std::size_t k_paths,
                        const LinearSolverConfig& cfg, std::vector<EpochLog>* history) {
    p.model.validate();
    if (std::abs(grid.start() - p.eval_time) > 1e-12 || std::abs(grid.end() - p.horizon) > 1e-12)
        throw std::invalid_argument("solve_linear: grid must span [eval_time, horizon]");
    if (cfg.arch.input_dim != static_cast<Eigen::Index>(p.model.dim))
        throw std::invalid_argument("solve_linear: architecture input_dim != model dim");
    if (!p.boundary) throw std::invalid_argument("solve_linear: boundary/terminal data required");

    const InitSampler init = p.init ? p.init : uniform_box_sampler(p.region);
    const std::size_t d = p.model.dim;

    // One fresh simulation set per minibatch; the fixed-dataset mode pins the
    // epoch-0 draw.
    auto build = [&, init](long epoch, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        const std::uint64_t bseed =
            mix_seed({cfg.train.seed, 0xBA7C5EEDull, static_cast<std::uint64_t>(cfg.fresh_batches ? epoch : 0)});
        PathBatch batch = simulate_paths(p.model, p.domain, init, grid, k_paths, bseed, cfg.sim_threads);
        std::vector<double> targets = pathwise_functional(batch, p.discount, p.running, p.boundary);
        X.resize(static_cast<Eigen::Index>(k_paths), static_cast<Eigen::Index>(d));
        y.resize(static_cast<Eigen::Index>(k_paths));
        for (std::size_t k = 0; k < k_paths; ++k) {
            auto xi = batch.init(k);
            for (std::size_t i = 0; i < d; ++i) X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = xi[i];
            y(static_cast<Eigen::Index>(k)) = targets[k];
        }
    };

    BatchStream stream;
    if (cfg.fresh_batches) {
        stream = build;
    } else {
        // Simulate once, then replay.
        auto cached = std::make_shared<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>();
        build(0, cached->first, cached->second);
        stream = [cached](long, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
            X = cached->first;
            y = cached->second;
        };
    }

    MlpNetwork net = MlpNetwork::init(cfg.arch, mix_seed({cfg.train.seed, 0x14171417ull}));
    TrainConfig tc = cfg.train;
    tc.minibatch_size = static_cast<long>(k_paths);
    std::vector<EpochLog> log = train(net, stream, tc);
    if (history) *history = std::move(log);
    return net;
}

PointFn as_point_fn(const MlpNetwork& net) {
    return [&net](std::span<const double> x) { return net.value(x); };
}

namespace {

ErrorReport l1_error_impl(ErrorMetric metric, const PointFn& net, const PointFn& reference,
                          const InitSampler& sampler, std::size_t dim, std::size_t n_samples,
                          std::uint64_t seed) {
    if (n_samples == 0) throw std::invalid_argument("l1 error: n_samples must be >= 1");
    constexpr double kRefFloor = 1e-8;
    ErrorReport report;
    report.metric = metric;
    report.points.reserve(n_samples);

    RngEngine rng = make_stream(seed, 0xE7A1ull);
    std::vector<double> x(dim);
    long double sum = 0.0L, sumsq = 0.0L;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        sampler(rng, x);
        const double u = net(x);
        const double ref = reference(x);
        const bool excluded = metric == ErrorMetric::kRelativeL1 && std::abs(ref) < kRefFloor;
        report.points.push_back({x, u, ref, excluded});
        if (excluded) {
            ++report.excluded_count;
            continue;
        }
        const double err =
            metric == ErrorMetric::kRelativeL1 ? std::abs((u - ref) / ref) : std::abs(u - ref);
        sum += err;
        sumsq += static_cast<long double>(err) * err;
        ++used;
    }
    if (used == 0) throw std::runtime_error("l1 error: degenerate metric, all points excluded");
    report.sample_count = used;
    report.estimate = static_cast<double>(sum / used);
    if (used > 1) {
        const long double var = (sumsq - sum * sum / used) / (used - 1);
        report.std_error = std::sqrt(std::max(0.0, static_cast<double>(var)) / static_cast<double>(used));
    }
    return report;
}

}  // namespace

ErrorReport relative_l1_error(const PointFn& net, const PointFn& reference, const InitSampler& sampler,
                              std::size_t dim, std::size_t n_samples, std::uint64_t seed) {
    return l1_error_impl(ErrorMetric::kRelativeL1, net, reference, sampler, dim, n_samples, seed);
}

ErrorReport absolute_l1_error(const PointFn& net, const PointFn& reference, const InitSampler& sampler,
                              std::size_t dim, std::size_t n_samples, std::uint64_t seed) {
    return l1_error_impl(ErrorMetric::kAbsoluteL1, net, reference, sampler, dim, n_samples, seed);
}

}  // namespace pide
