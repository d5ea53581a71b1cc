#include "pide/case_studies.hpp"

#include <cmath>
#include <sstream>

#include "pide/csv.hpp"

namespace pide {

MarkLaw make_mark(double alpha, double beta, GammaConvention conv) {
    return conv == GammaConvention::kShapeRate ? MarkLaw{alpha, beta} : MarkLaw{alpha, 1.0 / beta};
}

// ---------------------------------------------------------------------------
// reinsurance

std::string ReinsuranceParams::digest() const {
    std::ostringstream os;
    os << "reinsurance:b=" << revert_speed << '*' << revert_level << ",s=" << vol_factor << ",claim=("
       << claim_shape << ',' << claim_rate << (gamma_convention == GammaConvention::kShapeRate ? ",rate" : ",scale")
       << "),K=" << strike << ",T=" << horizon;
    return os.str();
}

LinearProblem reinsurance_problem(const ReinsuranceParams& params) {
    LinearProblem p;
    p.model.dim = 2;  // (accumulated loss, claim intensity)
    p.model.drift = [params](double, std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = params.revert_speed * (params.revert_level - x[1]);
    };
    p.model.diffusion = [params](double, std::span<const double> x, std::span<double> out) {
        out[0] = out[1] = out[2] = 0.0;
        out[3] = params.vol_factor * x[1];
    };
    JumpComponent claims;
    claims.intensity_fn = [](double, std::span<const double> x) { return x[1]; };
    claims.marks = {make_mark(params.claim_shape, params.claim_rate, params.gamma_convention)};
    claims.loading = [](double, std::span<const double>, std::span<const double> marks, std::span<double> out) {
        out[0] = marks[0];
        out[1] = 0.0;
    };
    p.model.jumps = {claims};
    p.model.post_step = [](double, std::span<double> x) { x[1] = std::max(0.0, x[1]); };

    p.domain = Domain::all_of(2);
    p.horizon = params.horizon;
    const double strike = params.strike;
    p.boundary = [strike](double, std::span<const double> x) { return std::max(x[0] - strike, 0.0); };
    p.region = Box{{params.loss_lo, params.intensity_lo}, {params.loss_hi, params.intensity_hi}};
    p.domain.bounding_box = p.region;
    return p;
}

// ---------------------------------------------------------------------------
// ruin

std::string RuinParams::digest() const {
    std::ostringstream os;
    os << "ruin3:s=" << sigma[0] << ",b=" << premium[0] << ",lam=";
    for (double l : intensity) os << l << ';';
    os << "a=";
    for (double a : alpha) os << a << ';';
    os << "beta=";
    for (double b : beta) os << b << ';';
    os << "cap=" << cap << ",T=" << horizon
       << (gamma_convention == GammaConvention::kShapeRate ? ",rate" : ",scale");
    return os.str();
}

LinearProblem ruin_problem(const RuinParams& params) {
    LinearProblem p;
    p.model.dim = 3;
    p.model.drift = constant_drift({params.premium[0], params.premium[1], params.premium[2]});
    p.model.diffusion = constant_diagonal_diffusion({params.sigma[0], params.sigma[1], params.sigma[2]});

    auto line = [&params](std::size_t which, std::size_t coord) {
        JumpComponent c;
        c.intensity = params.intensity[which];
        c.marks = {make_mark(params.alpha[which], params.beta[which], params.gamma_convention)};
        c.loading = [coord](double, std::span<const double>, std::span<const double> marks,
                            std::span<double> out) {
            out[0] = out[1] = out[2] = 0.0;
            out[coord] = -marks[0];
        };
        return c;
    };
    JumpComponent shock;  // storm and flood hit simultaneously
    shock.intensity = params.intensity[3];
    shock.marks = {make_mark(params.alpha[3], params.beta[3], params.gamma_convention),
                   make_mark(params.alpha[4], params.beta[4], params.gamma_convention)};
    shock.loading = [](double, std::span<const double>, std::span<const double> marks, std::span<double> out) {
        out[0] = 0.0;
        out[1] = -marks[0];
        out[2] = -marks[1];
    };
    p.model.jumps = {line(0, 0), line(1, 1), line(2, 2), shock};

    const double cap = params.cap;
    p.domain.whole_space = false;
    p.domain.membership = [cap](std::span<const double> x) {
        for (double v : x)
            if (v <= 0.0 || v >= cap) return false;
        return true;
    };
    p.horizon = params.horizon;
    // Ruin indicator: 1 when some line is at or below zero, else 0 (cap exits
    // and survival to T alike).
    p.boundary = [](double, std::span<const double> x) {
        for (double v : x)
            if (v <= 0.0) return 1.0;
        return 0.0;
    };
    p.region = Box{std::vector<double>(3, params.region_lo), std::vector<double>(3, params.region_hi)};
    p.domain.bounding_box = p.region;
    return p;
}

// ---------------------------------------------------------------------------
// regulator

std::string RegulatorParams::digest() const {
    std::ostringstream os;
    os << "regulator:d=" << dim << ",s=" << sigma << ",theta=" << theta << ",rho=" << rho << ",lam="
       << intensity << ",a=" << alpha << ",b=" << beta << ",T=" << horizon
       << (gamma_convention == GammaConvention::kShapeRate ? ",rate" : ",scale");
    return os.str();
}

SemilinearProblem regulator_problem(const RegulatorParams& params) {
    SemilinearProblem p;
    const std::size_t d = params.dim;
    p.model.dim = d;
    p.model.diffusion = constant_diagonal_diffusion(std::vector<double>(d, params.sigma));
    p.model.jumps.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        JumpComponent c;
        c.intensity = params.intensity;
        c.marks = {make_mark(params.alpha, params.beta, params.gamma_convention)};
        c.loading = [i, d](double, std::span<const double>, std::span<const double> marks,
                           std::span<double> out) {
            for (std::size_t j = 0; j < d; ++j) out[j] = 0.0;
            out[i] = marks[0];
        };
        c.compensated = true;
        p.model.jumps.push_back(std::move(c));
    }

    p.domain = Domain::all_of(d);
    p.horizon = params.horizon;
    const double theta = params.theta, rho = params.rho;
    p.nonlinearity = [theta](double, std::span<const double> x, double, std::span<const double> z) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * x[i] - z[i] * z[i] / (4.0 * theta);
        return acc;
    };
    p.boundary = [rho](double, std::span<const double> x) {
        double acc = 0.0;
        for (double v : x) acc += rho * v * v;
        return acc;
    };
    p.terminal_smooth = true;
    p.terminal_gradient = [rho](double, std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * rho * x[i];
    };
    p.region = Box{std::vector<double>(d, params.region_lo), std::vector<double>(d, params.region_hi)};
    p.domain.bounding_box = p.region;
    return p;
}

namespace {

double regulator_kappa(const RegulatorParams& p) {
    const double sq = std::sqrt(p.theta);
    return (p.rho - sq) / (p.rho + sq) * std::exp(-2.0 * p.horizon / sq);
}

}  // namespace

double regulator_a(double t, const RegulatorParams& p) {
    const double sq = std::sqrt(p.theta);
    const double u = regulator_kappa(p) * std::exp(2.0 * t / sq);
    return sq * (1.0 + u) / (1.0 - u);
}

double regulator_b(double t, const RegulatorParams& p) {
    const double sq = std::sqrt(p.theta);
    const double kap = regulator_kappa(p);
    const MarkLaw mark = make_mark(p.alpha, p.beta, p.gamma_convention);
    // per-coordinate noise load sigma^2 + ∫ z^2 ν(dz)
    const double c = p.sigma * p.sigma + p.intensity * mark.second_moment();
    const double u_t = kap * std::exp(2.0 * t / sq);
    const double u_T = kap * std::exp(2.0 * p.horizon / sq);
    const double per_coord = c * (sq * (p.horizon - t) + p.theta * std::log((1.0 - u_t) / (1.0 - u_T)));
    return static_cast<double>(p.dim) * per_coord;
}

double regulator_analytic(double t, std::span<const double> x, const RegulatorParams& p) {
    const double a = regulator_a(t, p);
    double acc = regulator_b(t, p);
    for (double v : x) acc += a * v * v;
    return acc;
}

// ---------------------------------------------------------------------------
// insurance portfolio

double InsuranceParams::eta_bar() const {
    return make_mark(alpha, beta, gamma_convention).mean();
}
double InsuranceParams::alpha_bar() const { return mu_bar - intensity * eta_bar(); }

std::string InsuranceParams::digest() const {
    std::ostringstream os;
    os << "insurance:s=" << sigma << ",g=" << gamma << ",k=" << kappa << ",mu=" << mu_bar << ",lam="
       << intensity << ",a=" << alpha << ",b=" << beta << ",T=" << horizon << ",delta=" << delta
       << (gamma_convention == GammaConvention::kShapeRate ? ",rate" : ",scale");
    return os.str();
}

SemilinearProblem insurance_problem(const InsuranceParams& params, bool constrained) {
    SemilinearProblem p;
    p.model.dim = 2;  // (portfolio size q, equity e)
    const double mu = params.mu_bar, sig = params.sigma;
    p.model.drift = [mu](double, std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = x[0] * mu;
    };
    p.model.diffusion = [sig](double, std::span<const double> x, std::span<double> out) {
        out[0] = out[1] = out[2] = 0.0;
        out[3] = sig * x[0];
    };
    JumpComponent claims;  // equity drops by q z per large claim
    claims.intensity = params.intensity;
    claims.marks = {make_mark(params.alpha, params.beta, params.gamma_convention)};
    claims.loading = [](double, std::span<const double> x, std::span<const double> marks, std::span<double> out) {
        out[0] = 0.0;
        out[1] = -x[0] * marks[0];
    };
    p.model.jumps = {claims};

    p.horizon = params.horizon;
    const double kappa = params.kappa;
    p.nonlinearity = [kappa](double, std::span<const double>, double, std::span<const double> z) {
        double dz = z[1];
        if (std::abs(dz) < 1e-3) dz = (dz < 0.0 ? -1.0 : 1.0) * 1e-3;  // early-training guard
        return z[0] * z[0] / (4.0 * kappa * dz);
    };
    const double gam = params.gamma;
    p.terminal_smooth = true;
    p.terminal_gradient = [gam](double, std::span<const double> x, std::span<double> out) {
        out[0] = -2.0 * gam * x[0];
        out[1] = 1.0;
    };

    if (!constrained) {
        p.domain = Domain::all_of(2);
        p.boundary = [gam](double, std::span<const double> x) { return x[1] - gam * x[0] * x[0]; };
        p.region = Box{{params.q_lo, params.e_lo}, {params.q_hi, params.e_hi}};
    } else {
        const double qcap = params.q_cap, ecap = params.e_cap, delta = params.delta;
        p.domain.whole_space = false;
        p.domain.membership = [qcap, ecap, delta](std::span<const double> x) {
            return std::abs(x[0]) < qcap && delta * std::abs(x[0]) < x[1] && x[1] < ecap;
        };
        InsuranceParams prm = params;
        p.boundary = [prm](double t, std::span<const double> x) {
            return insurance_analytic(t, x[0], x[1], prm) - insurance_penalty(t, x[1], prm);
        };
        // Acceptable-position wedge |q| <= e <= 6 from the experiments.
        p.region = Box{{-params.e_hi, params.e_lo}, {params.e_hi, params.e_hi}};
    }
    p.domain.bounding_box = p.region;
    return p;
}

InsuranceH insurance_h(double t, const InsuranceParams& p) {
    const double a = p.horizon + p.kappa / p.gamma;
    const double abar = p.alpha_bar();
    const double w = a - t;
    const double w1 = a - p.horizon;  // = kappa / gamma
    const double c1 = -0.5 * abar * p.horizon * p.horizon + a * abar * p.horizon;
    const double big_c = c1 - 0.5 * abar * a * a;
    InsuranceH h;
    h.h2 = 2.0 * p.kappa / w;
    h.h1 = 0.5 * abar * w + big_c / w;
    h.h0 = (abar * abar / 12.0 * (w * w * w - w1 * w1 * w1) + abar * big_c * (w - w1) -
            big_c * big_c * (1.0 / w - 1.0 / w1)) /
           (4.0 * p.kappa);
    return h;
}

double insurance_analytic(double t, double q, double e, const InsuranceParams& p) {
    const InsuranceH h = insurance_h(t, p);
    return e + h.h0 + h.h1 * q - 0.5 * h.h2 * q * q;
}

double insurance_penalty(double t, double e, const InsuranceParams& p) {
    return 0.5 * (p.horizon - t) * (p.e_cap - e) / p.e_cap;
}

double optimal_rate_analytic(double t, double q, const InsuranceParams& p) {
    const InsuranceH h = insurance_h(t, p);
    return (h.h1 - h.h2 * q) / (2.0 * p.kappa);
}

OptimalRate optimal_rate(const SplittingSolution& sol, std::size_t n, double q, double e, double kappa) {
    Eigen::MatrixXd pt(1, 2);
    pt << q, e;
    const SplitEval ev = evaluate(sol, n, pt, /*with_gradients=*/true);
    OptimalRate out;
    double ue = ev.gradients(0, 1);
    if (std::abs(ue) < 1e-3) {
        out.guarded = true;
        ue = (ue < 0.0 ? -1.0 : 1.0) * 1e-3;
    }
    out.theta = ev.gradients(0, 0) / (2.0 * kappa * ue);
    return out;
}

std::vector<std::string> case_names() {
    return {"reinsurance", "ruin3", "regulator", "insurance-unreg", "insurance-reg"};
}

}  // namespace pide
