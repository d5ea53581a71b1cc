#pragma once

#include "pide/linear_solver.hpp"

namespace pide {

/// f(t, x, y, z) with y the solution value and z its spatial gradient.
using Nonlinearity =
    std::function<double(double t, std::span<const double> x, double y, std::span<const double> z)>;

struct SemilinearProblem {
    ModelSpec model;
    Domain domain;
    double horizon = 1.0;
    Nonlinearity nonlinearity;
    ScalarField boundary;  // g(t,x); g(T,.) is the terminal condition
    /// g(T,.) in C^1: the backward induction starts from the exact terminal
    /// data; otherwise a terminal network is fitted first.
    bool terminal_smooth = true;
    VectorField terminal_gradient;  // required when terminal_smooth
    Box region;                     // base sampling region A
};

enum class SplittingRule { kEndpoint, kMidpoint };

SplittingRule rule_from_string(const std::string& s);
std::string to_string(SplittingRule r);

/// Linearization grid 0 = t_0 < ... < t_N = T with interval midpoints.
struct SplittingGrid {
    std::vector<double> points;
    SplittingRule rule = SplittingRule::kMidpoint;

    static SplittingGrid uniform(double horizon, std::size_t intervals, SplittingRule rule);

    std::size_t intervals() const { return points.size() - 1; }
    /// Midpoint of interval n (1-based): (t_{n-1} + t_n) / 2.
    double midpoint(std::size_t n) const { return 0.5 * (points[n - 1] + points[n]); }
};

/// Per-coordinate one-unit-time noise scale (diffusion plus jump second
/// moments, estimated at the region center); drives the region inflation.
std::vector<double> noise_scales(const ModelSpec& model, const Box& base, double t0);

/// Inflates the base region coordinatewise by margin_sigmas * scale_i *
/// sqrt(t_n - t_0) so that one-step escapes from A_{n-1} past A_n are rare.
std::vector<Box> build_regions(const Box& base, const ModelSpec& model,
                               const std::vector<double>& grid_points, double margin_sigmas);

/// Batched value-and-gradient view of "the solution one grid point ahead":
/// either a trained network or the exact terminal data.
class ValueGradEvaluator {
public:
    static ValueGradEvaluator from_network(const MlpNetwork& net);  // net must outlive the evaluator
    static ValueGradEvaluator from_terminal(const ScalarField& value, const VectorField& gradient,
                                            double at_time);

    void operator()(const Eigen::MatrixXd& points, Eigen::VectorXd& values, Eigen::MatrixXd& gradients,
                    bool need_gradients) const;

private:
    std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&, Eigen::MatrixXd&, bool)> fn_;
};

/// Regression targets for one backward step over [t_{n-1}, t_n]:
///   U_n(X_{t_n}) 1{τ > t_n} + g(τ, X_τ) 1{τ <= t_n} + (t_n ∧ τ - t_{n-1}) f(...)
/// with f evaluated at the interval end (endpoint rule) or the interval
/// midpoint (midpoint rule), both capped at τ. The batch's grid must contain
/// the midpoint under the midpoint rule, and `midpoint_eval` supplies the
/// (y, z) arguments there.
std::vector<double> step_targets(const PathBatch& batch, const ValueGradEvaluator& next,
                                 const ScalarField& boundary, const Nonlinearity& f, SplittingRule rule,
                                 const ValueGradEvaluator* midpoint_eval);

struct StepLog {
    std::size_t step = 0;
    std::vector<EpochLog> value_history;
    std::vector<EpochLog> midpoint_history;
    double leave_fraction = 0.0;  // paths leaving A_n in one step (diagnostic batch)
};

struct SplittingSolution {
    SplittingGrid grid;
    std::vector<Box> regions;  // A_0 ... A_N
    /// U_0 ... U_{N-1}, plus the fitted U_N at the back when the terminal is
    /// not smooth.
    std::vector<MlpNetwork> value_nets;
    /// Midpoint-rule companions Ū_1 ... Ū_N at index n-1; empty for endpoint.
    std::vector<MlpNetwork> midpoint_nets;
    bool exact_terminal = true;
    ScalarField terminal_value;
    VectorField terminal_gradient;
    std::vector<StepLog> logs;
};

struct SplittingConfig {
    MlpArchitecture arch;
    TrainConfig train;
    std::size_t sub_steps = 5;  // Euler steps per interval, rounded up to even
    std::size_t k_paths = 1024;
    double margin_sigmas = 3.0;
    double leave_warn_fraction = 0.01;
    int sim_threads = 1;
    std::function<void(const std::string&)> warn;  // optional sink for region warnings
    long terminal_fit_epochs = 2000;               // only used when !terminal_smooth
};

/// Backward induction n = N..1. The midpoint rule first fits Ū_n over
/// [t̄_n, t_n] by an endpoint step against U_n, then fits U_{n-1} over
/// [t_{n-1}, t_n] with f frozen at the midpoint. Initial draws are uniform
/// on the step's inflated region. All returned networks are in inference
/// mode.
SplittingSolution solve_semilinear(const SemilinearProblem& p, const SplittingGrid& sgrid,
                                   const SplittingConfig& cfg);

struct SplitEval {
    Eigen::VectorXd values;
    Eigen::MatrixXd gradients;          // empty unless requested
    std::vector<bool> extrapolated;     // outside A_n (informational)
};

/// U_n at the given points (rows); n = intervals() evaluates the terminal
/// representation. Points outside A_n are flagged, not rejected.
SplitEval evaluate(const SplittingSolution& sol, std::size_t n, const Eigen::MatrixXd& points,
                   bool with_gradients = false);

}  // namespace pide
