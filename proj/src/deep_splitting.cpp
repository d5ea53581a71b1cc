#include "pide/deep_splitting.hpp"

#include <cmath>
#include <stdexcept>

namespace pide {

SplittingRule rule_from_string(const std::string& s) {
    if (s == "endpoint") return SplittingRule::kEndpoint;
    if (s == "midpoint") return SplittingRule::kMidpoint;
    throw std::invalid_argument("unknown splitting rule: " + s);
}

std::string to_string(SplittingRule r) {
    return r == SplittingRule::kEndpoint ? "endpoint" : "midpoint";
}

SplittingGrid SplittingGrid::uniform(double horizon, std::size_t intervals, SplittingRule rule) {
    SplittingGrid g;
    g.points = TimeGrid::uniform(0.0, horizon, intervals).points;
    g.rule = rule;
    return g;
}

std::vector<double> noise_scales(const ModelSpec& model, const Box& base, double t0) {
    const std::size_t d = model.dim;
    std::vector<double> center(d);
    for (std::size_t i = 0; i < d; ++i) center[i] = 0.5 * (base.lo[i] + base.hi[i]);

    std::vector<double> var(d, 0.0);
    if (model.diffusion) {
        std::vector<double> sigma(d * d);
        model.diffusion(t0, center, sigma);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) var[i] += sigma[i * d + j] * sigma[i * d + j];
    }
    // Jump contribution: rate times the mean squared displacement, estimated
    // from a fixed internal mark sample.
    constexpr std::size_t kMarkSamples = 256;
    RngEngine rng = make_stream(0x5CA1E5ull, 0);
    std::vector<double> marks, disp(d);
    for (const auto& jump : model.jumps) {
        const double rate = jump.rate_at(t0, center);
        if (rate <= 0.0) continue;
        marks.resize(jump.marks.size());
        std::vector<double> acc(d, 0.0);
        for (std::size_t s = 0; s < kMarkSamples; ++s) {
            for (std::size_t q = 0; q < jump.marks.size(); ++q)
                marks[q] = sample_gamma_one(jump.marks[q].shape, jump.marks[q].rate, rng);
            jump.loading(t0, center, marks, disp);
            for (std::size_t i = 0; i < d; ++i) acc[i] += disp[i] * disp[i];
        }
        for (std::size_t i = 0; i < d; ++i) var[i] += rate * acc[i] / kMarkSamples;
    }
    for (auto& v : var) v = std::sqrt(v);
    return var;
}

namespace {

Box region_at(const Box& base, const std::vector<double>& scales, double margin_sigmas, double dt_from_start) {
    std::vector<double> margin(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i)
        margin[i] = margin_sigmas * scales[i] * std::sqrt(std::max(0.0, dt_from_start));
    return base.inflated(margin);
}

}  // namespace

std::vector<Box> build_regions(const Box& base, const ModelSpec& model,
                               const std::vector<double>& grid_points, double margin_sigmas) {
    const std::vector<double> scales = noise_scales(model, base, grid_points.front());
    std::vector<Box> regions;
    regions.reserve(grid_points.size());
    for (double t : grid_points)
        regions.push_back(region_at(base, scales, margin_sigmas, t - grid_points.front()));
    return regions;
}

// ---------------------------------------------------------------------------

ValueGradEvaluator ValueGradEvaluator::from_network(const MlpNetwork& net) {
    ValueGradEvaluator e;
    e.fn_ = [&net](const Eigen::MatrixXd& pts, Eigen::VectorXd& vals, Eigen::MatrixXd& grads,
                   bool need_gradients) {
        vals = net.forward_inference(pts);
        if (need_gradients) grads = net.input_gradient(pts);
    };
    return e;
}

ValueGradEvaluator ValueGradEvaluator::from_terminal(const ScalarField& value, const VectorField& gradient,
                                                     double at_time) {
    ValueGradEvaluator e;
    e.fn_ = [value, gradient, at_time](const Eigen::MatrixXd& pts, Eigen::VectorXd& vals,
                                       Eigen::MatrixXd& grads, bool need_gradients) {
        const Eigen::Index n = pts.rows(), d = pts.cols();
        vals.resize(n);
        if (need_gradients) grads.resize(n, d);
        std::vector<double> x(static_cast<std::size_t>(d)), g(static_cast<std::size_t>(d));
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = pts(k, i);
            vals(k) = value(at_time, x);
            if (need_gradients) {
                gradient(at_time, x, g);
                for (Eigen::Index i = 0; i < d; ++i) grads(k, i) = g[static_cast<std::size_t>(i)];
            }
        }
    };
    return e;
}

void ValueGradEvaluator::operator()(const Eigen::MatrixXd& points, Eigen::VectorXd& values,
                                    Eigen::MatrixXd& gradients, bool need_gradients) const {
    fn_(points, values, gradients, need_gradients);
}

std::vector<double> step_targets(const PathBatch& batch, const ValueGradEvaluator& next,
                                 const ScalarField& boundary, const Nonlinearity& f, SplittingRule rule,
                                 const ValueGradEvaluator* midpoint_eval) {
    const TimeGrid& grid = batch.grid();
    const std::size_t K = batch.paths(), d = batch.dim();
    const std::size_t end_idx = grid.steps();
    const double t_start = grid.start(), t_end = grid.end();

    std::size_t f_idx = end_idx;
    if (rule == SplittingRule::kMidpoint) {
        f_idx = grid.index_of(0.5 * (t_start + t_end));
        if (f_idx == TimeGrid::npos)
            throw std::invalid_argument("step_targets: midpoint rule needs the interval midpoint on the grid");
        if (!midpoint_eval)
            throw std::invalid_argument("step_targets: midpoint rule needs the midpoint network");
    }
    const ValueGradEvaluator& f_source = rule == SplittingRule::kMidpoint ? *midpoint_eval : next;

    // Gather the states feeding U_n and f.
    Eigen::MatrixXd end_states(K, d), f_states(K, d);
    std::vector<double> f_times(K);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t stop = batch.stop_index(k);
        const std::size_t fk = std::min(f_idx, stop);
        auto xe = batch.state(k, stop);
        auto xf = batch.state(k, fk);
        for (std::size_t i = 0; i < d; ++i) {
            end_states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = xe[i];
            f_states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = xf[i];
        }
        f_times[k] = grid.points[fk];
    }

    Eigen::VectorXd end_values;
    Eigen::MatrixXd unused;
    next(end_states, end_values, unused, false);
    Eigen::VectorXd f_values;
    Eigen::MatrixXd f_grads;
    f_source(f_states, f_values, f_grads, true);

    std::vector<double> targets(K);
    std::vector<double> x(d), z(d);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t stop = batch.stop_index(k);
        const bool exited = batch.exited(k);
        double base;
        if (exited) {
            base = boundary(grid.points[stop], batch.state(k, stop));
        } else {
            base = end_values(static_cast<Eigen::Index>(k));
        }
        const double weight = grid.points[stop] - t_start;  // (t_n ∧ τ) - t_{n-1}
        double fy = 0.0;
        if (f) {
            for (std::size_t i = 0; i < d; ++i) {
                x[i] = f_states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
                z[i] = f_grads(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            }
            fy = f(f_times[k], x, f_values(static_cast<Eigen::Index>(k)), z);
        }
        targets[k] = base + weight * fy;
    }
    return targets;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t even_sub_steps(std::size_t sub_steps) {
    const std::size_t s = std::max<std::size_t>(2, sub_steps);
    return s % 2 == 0 ? s : s + 1;
}

MlpNetwork fit_step(const SemilinearProblem& p, const SplittingConfig& cfg, const TimeGrid& sub_grid,
                    const Box& draw_region, const ValueGradEvaluator& next, SplittingRule rule,
                    const ValueGradEvaluator* midpoint_eval, std::uint64_t step_tag,
                    std::vector<EpochLog>& history, double* leave_fraction, const Box* next_region) {
    const InitSampler init = uniform_box_sampler(draw_region);
    bool diagnosed = false;
    auto stream = [&, init](long epoch, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        const std::uint64_t bseed =
            mix_seed({cfg.train.seed, step_tag, static_cast<std::uint64_t>(epoch)});
        PathBatch batch =
            simulate_paths(p.model, p.domain, init, sub_grid, cfg.k_paths, bseed, cfg.sim_threads);
        std::vector<double> targets = step_targets(batch, next, p.boundary, p.nonlinearity, rule, midpoint_eval);
        const std::size_t K = batch.paths(), d = batch.dim();
        X.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(d));
        y.resize(static_cast<Eigen::Index>(K));
        for (std::size_t k = 0; k < K; ++k) {
            auto xi = batch.init(k);
            for (std::size_t i = 0; i < d; ++i) X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = xi[i];
            y(static_cast<Eigen::Index>(k)) = targets[k];
        }
        if (!diagnosed && leave_fraction && next_region) {
            diagnosed = true;
            std::size_t left = 0, alive = 0;
            for (std::size_t k = 0; k < K; ++k) {
                if (batch.exited(k)) continue;
                ++alive;
                if (!next_region->contains(batch.state(k, sub_grid.steps()))) ++left;
            }
            *leave_fraction = alive == 0 ? 0.0 : static_cast<double>(left) / static_cast<double>(alive);
        }
    };

    MlpNetwork net = MlpNetwork::init(cfg.arch, mix_seed({cfg.train.seed, step_tag, 0x1417ull}));
    TrainConfig tc = cfg.train;
    tc.minibatch_size = static_cast<long>(cfg.k_paths);
    history = train(net, stream, tc);
    return net;
}

MlpNetwork fit_terminal(const SemilinearProblem& p, const SplittingConfig& cfg, const Box& region) {
    const InitSampler init = uniform_box_sampler(region);
    const std::size_t d = p.model.dim;
    auto stream = [&, init](long epoch, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        RngEngine rng = make_stream(mix_seed({cfg.train.seed, 0x7E51ull}), static_cast<std::uint64_t>(epoch));
        X.resize(static_cast<Eigen::Index>(cfg.k_paths), static_cast<Eigen::Index>(d));
        y.resize(static_cast<Eigen::Index>(cfg.k_paths));
        std::vector<double> x(d);
        for (std::size_t k = 0; k < cfg.k_paths; ++k) {
            init(rng, x);
            for (std::size_t i = 0; i < d; ++i) X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = x[i];
            y(static_cast<Eigen::Index>(k)) = p.boundary(p.horizon, x);
        }
    };
    MlpNetwork net = MlpNetwork::init(cfg.arch, mix_seed({cfg.train.seed, 0x7E51ull, 0x1417ull}));
    TrainConfig tc = cfg.train;
    tc.minibatch_size = static_cast<long>(cfg.k_paths);
    tc.epochs = cfg.terminal_fit_epochs;
    tc.lr_schedule = scale_schedule(cfg.train.lr_schedule, static_cast<double>(cfg.terminal_fit_epochs) /
                                                               static_cast<double>(cfg.train.epochs));
    train(net, stream, tc);
    return net;
}

}  // namespace

SplittingSolution solve_semilinear(const SemilinearProblem& p, const SplittingGrid& sgrid,
                                   const SplittingConfig& cfg) {
    p.model.validate();
    if (!p.nonlinearity) throw std::invalid_argument("solve_semilinear: nonlinearity required");
    if (!p.boundary) throw std::invalid_argument("solve_semilinear: boundary/terminal data required");
    if (p.terminal_smooth && !p.terminal_gradient)
        throw std::invalid_argument("solve_semilinear: smooth terminal needs terminal_gradient");
    if (cfg.arch.input_dim != static_cast<Eigen::Index>(p.model.dim))
        throw std::invalid_argument("solve_semilinear: architecture input_dim != model dim");

    const std::size_t N = sgrid.intervals();
    const double t0 = sgrid.points.front();
    const std::vector<double> scales = noise_scales(p.model, p.region, t0);

    SplittingSolution sol;
    sol.grid = sgrid;
    sol.regions = build_regions(p.region, p.model, sgrid.points, cfg.margin_sigmas);
    sol.exact_terminal = p.terminal_smooth;
    sol.terminal_value = p.boundary;
    sol.terminal_gradient = p.terminal_gradient;
    sol.value_nets.resize(p.terminal_smooth ? N : N + 1);
    if (sgrid.rule == SplittingRule::kMidpoint) sol.midpoint_nets.resize(N);
    sol.logs.resize(N);

    if (!p.terminal_smooth) sol.value_nets[N] = fit_terminal(p, cfg, sol.regions[N]);

    const std::size_t steps_full = even_sub_steps(cfg.sub_steps);
    const std::size_t steps_half = steps_full / 2;

    for (std::size_t n = N; n >= 1; --n) {
        const double s = sgrid.points[n - 1], e = sgrid.points[n];
        const double mid = sgrid.midpoint(n);
        StepLog& log = sol.logs[n - 1];
        log.step = n;

        ValueGradEvaluator next =
            (n == N && p.terminal_smooth)
                ? ValueGradEvaluator::from_terminal(p.boundary, p.terminal_gradient, p.horizon)
                : ValueGradEvaluator::from_network(sol.value_nets[n]);

        try {
            const ValueGradEvaluator* mid_eval = nullptr;
            ValueGradEvaluator mid_holder;
            if (sgrid.rule == SplittingRule::kMidpoint) {
                // First fit Ū_n over [t̄_n, t_n] with an endpoint step against U_n.
                const TimeGrid half_grid = TimeGrid::uniform(mid, e, steps_half);
                const Box mid_region = region_at(p.region, scales, cfg.margin_sigmas, mid - t0);
                sol.midpoint_nets[n - 1] =
                    fit_step(p, cfg, half_grid, mid_region, next, SplittingRule::kEndpoint, nullptr,
                             mix_seed({0xBABull, n}), log.midpoint_history, nullptr, nullptr);
                mid_holder = ValueGradEvaluator::from_network(sol.midpoint_nets[n - 1]);
                mid_eval = &mid_holder;
            }

            const TimeGrid full_grid = TimeGrid::uniform(s, e, steps_full);
            sol.value_nets[n - 1] =
                fit_step(p, cfg, full_grid, sol.regions[n - 1], next, sgrid.rule, mid_eval,
                         mix_seed({0x57E2ull, n}), log.value_history, &log.leave_fraction, &sol.regions[n]);
        } catch (const TrainingError& err) {
            throw std::runtime_error("solve_semilinear: step " + std::to_string(n) + ": " + err.what());
        }

        if (log.leave_fraction > cfg.leave_warn_fraction && cfg.warn)
            cfg.warn("step " + std::to_string(n) + ": " + std::to_string(100.0 * log.leave_fraction) +
                     "% of paths leave the next region in one step; consider a wider margin");
    }
    return sol;
}

SplitEval evaluate(const SplittingSolution& sol, std::size_t n, const Eigen::MatrixXd& points,
                   bool with_gradients) {
    const std::size_t N = sol.grid.intervals();
    if (n > N) throw std::invalid_argument("evaluate: step index out of range");
    SplitEval out;
    if (n == N && sol.exact_terminal) {
        ValueGradEvaluator term =
            ValueGradEvaluator::from_terminal(sol.terminal_value, sol.terminal_gradient, sol.grid.points.back());
        term(points, out.values, out.gradients, with_gradients);
    } else {
        const MlpNetwork& net = sol.value_nets[n];
        out.values = net.forward_inference(points);
        if (with_gradients) out.gradients = net.input_gradient(points);
    }
    out.extrapolated.resize(static_cast<std::size_t>(points.rows()));
    std::vector<double> x(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index k = 0; k < points.rows(); ++k) {
        for (Eigen::Index i = 0; i < points.cols(); ++i) x[static_cast<std::size_t>(i)] = points(k, i);
        out.extrapolated[static_cast<std::size_t>(k)] = !sol.regions[n].contains(x);
    }
    return out;
}

}  // namespace pide
