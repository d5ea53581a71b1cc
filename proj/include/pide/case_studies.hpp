#pragma once

#include <string>

#include "pide/deep_splitting.hpp"
#include "pide/linear_solver.hpp"

namespace pide {

/// Gamma(alpha, beta) parameter reading for the case-study claim laws.
/// shape-rate (mean alpha/beta) is the default; shape-scale reinterprets
/// beta as the scale parameter.
enum class GammaConvention { kShapeRate, kShapeScale };

MarkLaw make_mark(double alpha, double beta, GammaConvention conv);

// ---------------------------------------------------------------------------
// Stop-loss reinsurance with doubly stochastic claim arrivals. State (l, λ).

struct ReinsuranceParams {
    double revert_speed = 0.5;    // b(λ) = revert_speed (revert_level - λ)
    double revert_level = 100.0;
    double vol_factor = 0.2;      // σ(λ) = vol_factor λ
    double claim_shape = 1.0;
    double claim_rate = 1.0;
    double strike = 90.0;
    double horizon = 1.0;
    double loss_lo = 0.0, loss_hi = 30.0;
    double intensity_lo = 90.0, intensity_hi = 130.0;
    GammaConvention gamma_convention = GammaConvention::kShapeRate;

    std::string digest() const;
};

/// Pure terminal-value problem on the whole plane; payoff [l - K]^+ at T.
/// The claim intensity is the λ coordinate itself, frozen at the step start
/// and floored at zero (the Euler scheme can overshoot below zero).
LinearProblem reinsurance_problem(const ReinsuranceParams& params = {});

// ---------------------------------------------------------------------------
// Ruin probability of three business lines with a storm/flood common shock.

struct RuinParams {
    std::array<double, 3> sigma = {0.1, 0.1, 0.1};
    std::array<double, 3> premium = {6.0, 6.0, 6.0};
    std::array<double, 4> intensity = {2.0, 2.0, 10.0, 1.0};   // E, S, F, S+F
    std::array<double, 5> alpha = {3.0, 2.0, 0.5, 2.0, 1.0};
    std::array<double, 5> beta = {1.0, 1.0, 1.0, 1.0, 1.0};
    double horizon = 1.0;
    double region_lo = 0.1, region_hi = 5.0;
    /// Coordinate cap closing the domain; exit through the cap counts as
    /// survival (the boundary data is 1 only where some line is ruined).
    double cap = 50.0;
    GammaConvention gamma_convention = GammaConvention::kShapeRate;

    std::string digest() const;
};

LinearProblem ruin_problem(const RuinParams& params = {});

// ---------------------------------------------------------------------------
// Stochastic regulator: compensated jumps, quadratic costs, closed form.

struct RegulatorParams {
    std::size_t dim = 4;
    double sigma = 0.1;
    double theta = 1.0;   // control cost weight
    double rho = 0.5;     // terminal cost weight
    double intensity = 10.0;
    double alpha = 0.4;
    double beta = 4.0;
    double horizon = 1.0;
    double region_lo = -2.0, region_hi = 2.0;
    GammaConvention gamma_convention = GammaConvention::kShapeRate;

    std::string digest() const;
};

SemilinearProblem regulator_problem(const RegulatorParams& params = {});

/// Riccati-type coefficient of x_i^2 in the value function; a(T) = rho.
double regulator_a(double t, const RegulatorParams& params);
/// Constant term; b(T) = 0. Valid for any theta > 0, not just the unit case.
double regulator_b(double t, const RegulatorParams& params);
double regulator_analytic(double t, std::span<const double> x, const RegulatorParams& params);

// ---------------------------------------------------------------------------
// Optimal insurance portfolio under transaction costs; state (q, e).

struct InsuranceParams {
    double sigma = 0.1;
    double gamma = 0.1;     // liquidation cost weight
    double kappa = 0.1;     // transaction cost weight
    double mu_bar = 0.8;    // premium income rate
    double intensity = 5.0; // large-claim intensity
    double alpha = 0.4;
    double beta = 4.0;
    double horizon = 1.0;
    double q_lo = -7.0, q_hi = 7.0;
    double e_lo = 0.0, e_hi = 6.0;
    // Constrained extension (acceptable-position set).
    double delta = 1.0;     // solvency bound e > delta |q|
    double e_cap = 1e6;
    double q_cap = 10.0;
    GammaConvention gamma_convention = GammaConvention::kShapeRate;

    double eta_bar() const;    // mean claim size
    double alpha_bar() const;  // mu_bar - intensity * eta_bar
    std::string digest() const;
};

/// Unconstrained: pure terminal problem with u(T,q,e) = e - gamma q^2.
/// Constrained: domain of acceptable positions with boundary value
/// u_unreg - k, penalty k(t,q,e) = 0.5 (T-t)(e_cap - e)/e_cap.
SemilinearProblem insurance_problem(const InsuranceParams& params, bool constrained);

struct InsuranceH {
    double h0, h1, h2;
};
InsuranceH insurance_h(double t, const InsuranceParams& params);
double insurance_analytic(double t, double q, double e, const InsuranceParams& params);
double insurance_penalty(double t, double e, const InsuranceParams& params);

/// Analytic optimal trading rate of the unconstrained problem,
/// (h1 - h2 q) / (2 kappa).
double optimal_rate_analytic(double t, double q, const InsuranceParams& params);

struct OptimalRate {
    double theta = 0.0;
    bool guarded = false;  // |u_e| fell below the guard and was clamped
};

/// θ* = u_q / (2 kappa u_e) read off the trained solution by input
/// gradients; the denominator is clamped at sign(u_e) 1e-3 and flagged.
OptimalRate optimal_rate(const SplittingSolution& sol, std::size_t n, double q, double e, double kappa);

/// Canonical experiment names resolvable by the CLI.
std::vector<std::string> case_names();

}  // namespace pide
