// Criterion 1: analytic network gradients against central finite differences.
// Criterion 3: closed-form coefficient functions against their ODEs.

#include <cmath>
#include <random>
#include <sstream>

#include "acceptance.hpp"
#include "pide/case_studies.hpp"
#include "pide/network.hpp"
#include "pide/rng.hpp"

namespace acceptance {

using namespace pide;

namespace {

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-6); }

// Randomized small network with nondegenerate parameters and running stats.
MlpNetwork random_small_network(RngEngine& rng, Eigen::Index dim) {
    std::uniform_int_distribution<int> width(1, 8);
    std::uniform_int_distribution<int> coin(0, 1);
    MlpArchitecture arch;
    arch.input_dim = dim;
    arch.hidden = {width(rng), width(rng)};
    arch.activation = coin(rng) ? Activation::kSoftplus : Activation::kSigmoid;
    arch.batch_norm = coin(rng) != 0;
    arch.normalize_input = coin(rng) != 0;
    MlpNetwork net = MlpNetwork::init(arch, rng());

    std::normal_distribution<double> noise(0.0, 0.3);
    for (Eigen::Index i = 0; i < net.param_count(); ++i) net.params()(i) += noise(rng);
    // Perturb the running statistics away from (0, 1) through a few
    // training-mode passes over random batches.
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::MatrixXd warmup(8, dim);
    for (int pass = 0; pass < 3; ++pass) {
        for (Eigen::Index r = 0; r < warmup.rows(); ++r)
            for (Eigen::Index c = 0; c < warmup.cols(); ++c) warmup(r, c) = u(rng);
        net.set_mode(NetMode::kTraining);
        net.forward(warmup);
    }
    return net;
}

}  // namespace

CriterionResult criterion_gradient_oracle() {
    const double h = 1e-4;
    double worst_input = 0.0, worst_param = 0.0;
    RngEngine rng = make_stream(0xACCE7ull, 1);
    std::uniform_int_distribution<int> dims(1, 4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);

    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index d = dims(rng);
        MlpNetwork net = random_small_network(rng, d);

        // Input gradients in inference mode.
        net.set_mode(NetMode::kInference);
        Eigen::MatrixXd pts(4, d);
        for (Eigen::Index r = 0; r < pts.rows(); ++r)
            for (Eigen::Index c = 0; c < pts.cols(); ++c) pts(r, c) = u(rng);
        const Eigen::MatrixXd grad = net.input_gradient(pts);
        for (Eigen::Index r = 0; r < pts.rows(); ++r)
            for (Eigen::Index c = 0; c < d; ++c) {
                Eigen::MatrixXd hi = pts, lo = pts;
                hi(r, c) += h;
                lo(r, c) -= h;
                const double fd =
                    (net.forward_inference(hi.row(r))(0) - net.forward_inference(lo.row(r))(0)) / (2.0 * h);
                worst_input = std::max(worst_input, rel_gap(fd, grad(r, c)));
            }

        // Parameter gradients in training mode, through the batch statistics.
        net.set_mode(NetMode::kTraining);
        Eigen::MatrixXd batch(8, d);
        for (Eigen::Index r = 0; r < batch.rows(); ++r)
            for (Eigen::Index c = 0; c < batch.cols(); ++c) batch(r, c) = u(rng);
        Eigen::VectorXd targets(batch.rows());
        for (Eigen::Index r = 0; r < targets.size(); ++r) targets(r) = u(rng);

        Eigen::VectorXd grad_theta;
        net.loss_and_param_gradient(batch, targets, grad_theta);
        for (Eigen::Index i = 0; i < net.param_count(); ++i) {
            const double keep = net.params()(i);
            net.params()(i) = keep + h;
            const double up = net.training_loss(batch, targets);
            net.params()(i) = keep - h;
            const double down = net.training_loss(batch, targets);
            net.params()(i) = keep;
            worst_param = std::max(worst_param, rel_gap((up - down) / (2.0 * h), grad_theta(i)));
        }
    }

    std::ostringstream detail;
    detail << "gradient oracle: max relative gap vs central differences, inputs " << worst_input
           << ", parameters " << worst_param << " (tolerance 1e-4, 100 random networks)";
    return {1, worst_input < 1e-4 && worst_param < 1e-4, detail.str()};
}

// ---------------------------------------------------------------------------

namespace {

struct Residual {
    double value = 0.0;
    double at = 0.0;
};

template <typename F, typename G>
Residual max_ode_residual(const F& fn, const G& rhs, double t_lo, double t_hi, int n_grid) {
    const double h = 1e-6;
    Residual worst;
    for (int i = 0; i <= n_grid; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / n_grid;
        const double deriv = (fn(t + h) - fn(t - h)) / (2.0 * h);
        const double r = std::abs(deriv - rhs(t));
        if (r > worst.value) worst = {r, t};
    }
    return worst;
}

}  // namespace

CriterionResult criterion_analytic_residuals() {
    double worst = 0.0;
    std::ostringstream detail;

    // Stochastic regulator coefficients, at the case-study parameters and at
    // a non-unit control weight.
    for (double theta : {1.0, 2.5}) {
        RegulatorParams rp;
        rp.theta = theta;
        const double lam2 = rp.intensity * MarkLaw{rp.alpha, rp.beta}.second_moment();
        const double c = rp.sigma * rp.sigma + lam2;
        auto a = [&rp](double t) { return regulator_a(t, rp); };
        auto b = [&rp](double t) { return regulator_b(t, rp); };
        const Residual ra = max_ode_residual(
            a, [&](double t) { return a(t) * a(t) / rp.theta - 1.0; }, 0.0, rp.horizon - 1e-3, 2000);
        const Residual rb = max_ode_residual(
            b, [&](double t) { return -static_cast<double>(rp.dim) * a(t) * c; }, 0.0, rp.horizon - 1e-3,
            2000);
        worst = std::max({worst, ra.value, rb.value});
        if (std::abs(a(rp.horizon) - rp.rho) > 1e-12 || std::abs(b(rp.horizon)) > 1e-12)
            return {3, false, "regulator terminal values a(T)=rho, b(T)=0 violated"};
    }

    // Insurance portfolio coefficients.
    InsuranceParams ip;
    auto h2 = [&ip](double t) { return insurance_h(t, ip).h2; };
    auto h1 = [&ip](double t) { return insurance_h(t, ip).h1; };
    auto h0 = [&ip](double t) { return insurance_h(t, ip).h0; };
    const double abar = ip.alpha_bar();
    const Residual r2 = max_ode_residual(
        h2, [&](double t) { return h2(t) * h2(t) / (2.0 * ip.kappa); }, 0.0, ip.horizon - 1e-3, 2000);
    const Residual r1 = max_ode_residual(
        h1, [&](double t) { return -abar + h1(t) * h2(t) / (2.0 * ip.kappa); }, 0.0, ip.horizon - 1e-3,
        2000);
    const Residual r0 = max_ode_residual(
        h0, [&](double t) { return -h1(t) * h1(t) / (4.0 * ip.kappa); }, 0.0, ip.horizon - 1e-3, 2000);
    worst = std::max({worst, r2.value, r1.value, r0.value});

    const InsuranceH hT = insurance_h(ip.horizon, ip);
    if (std::abs(hT.h2 - 2.0 * ip.gamma) > 1e-12 || std::abs(hT.h1) > 1e-12 || std::abs(hT.h0) > 1e-12)
        return {3, false, "insurance terminal values h2(T)=2 gamma, h1(T)=h0(T)=0 violated"};

    detail << "analytic oracles: max ODE residual " << worst
           << " on [0, T-1e-3] (tolerance 1e-5); terminal values exact";
    return {3, worst < 1e-5, detail.str()};
}

}  // namespace acceptance
