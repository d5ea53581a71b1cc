#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "pide/network.hpp"
#include "pide/rng.hpp"

using namespace pide;

namespace {

MlpArchitecture plain_arch(Eigen::Index d, Eigen::Index w, Activation act = Activation::kSoftplus) {
    MlpArchitecture a;
    a.input_dim = d;
    a.hidden = {w, w};
    a.activation = act;
    a.batch_norm = false;
    a.normalize_input = false;
    return a;
}

// Exact linear chain: softplus(wx) - softplus(-wx) = wx, so the net below
// computes w . x + c with exact gradients.
MlpNetwork linear_chain(const Eigen::VectorXd& w, double c) {
    const Eigen::Index d = w.size();
    MlpNetwork net = MlpNetwork::init(plain_arch(d, 2), 1);
    net.params().setZero();
    Eigen::VectorXd& p = net.params();
    // layout without normalization: w1 (2 x d), b1, w2 (2 x 2), b2, wout (2), bout
    Eigen::Map<Eigen::MatrixXd> w1(p.data(), 2, d);
    w1.row(0) = w.transpose();
    w1.row(1) = -w.transpose();
    Eigen::Map<Eigen::MatrixXd> w2(p.data() + 2 * d + 2, 2, 2);
    w2 << 1.0, -1.0, -1.0, 1.0;
    Eigen::Map<Eigen::VectorXd> wout(p.data() + 2 * d + 2 + 4 + 2, 2);
    wout << 1.0, -1.0;
    p(p.size() - 1) = c;
    net.set_mode(NetMode::kInference);
    return net;
}

}  // namespace

TEST_CASE("initialization is seed-deterministic and Xavier-bounded") {
    MlpArchitecture arch;
    arch.input_dim = 3;
    arch.hidden = {7, 5};
    MlpNetwork a = MlpNetwork::init(arch, 42);
    MlpNetwork b = MlpNetwork::init(arch, 42);
    CHECK(a.params() == b.params());
    MlpNetwork c = MlpNetwork::init(arch, 43);
    CHECK(a.params() != c.params());

    const double bound1 = std::sqrt(6.0 / (3 + 7));
    const auto& p = a.params();
    // input scale/shift occupy the first six entries, then W1
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(p(i) == 1.0);
    for (Eigen::Index i = 3; i < 6; ++i) CHECK(p(i) == 0.0);
    for (Eigen::Index i = 6; i < 6 + 7 * 3; ++i) CHECK(std::abs(p(i)) <= bound1);
}

TEST_CASE("fresh network produces finite reproducible values") {
    MlpArchitecture arch;
    arch.input_dim = 2;
    arch.hidden = {50, 50};
    MlpNetwork net = MlpNetwork::init(arch, 7);
    net.set_mode(NetMode::kInference);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 2);
    const double v = net.forward(zero)(0);
    CHECK(std::isfinite(v));
    MlpNetwork again = MlpNetwork::init(arch, 7);
    again.set_mode(NetMode::kInference);
    CHECK(again.forward(zero)(0) == v);
}

TEST_CASE("inference on repeated rows gives identical outputs") {
    MlpNetwork net = MlpNetwork::init({2, {9, 9}, Activation::kSigmoid, true, true}, 3);
    net.set_mode(NetMode::kInference);
    Eigen::MatrixXd x(4, 2);
    x << 0.3, -1.0, 0.3, -1.0, 0.3, -1.0, 0.3, -1.0;
    const Eigen::VectorXd y = net.forward(x);
    for (Eigen::Index i = 1; i < 4; ++i) CHECK(y(i) == y(0));
}

TEST_CASE("zero weights with an output bias give a constant network") {
    MlpNetwork net = MlpNetwork::init(plain_arch(2, 4), 5);
    net.params().setZero();
    net.params()(net.param_count() - 1) = 3.25;
    net.set_mode(NetMode::kInference);
    Eigen::MatrixXd x(2, 2);
    x << 0.0, 0.0, 17.0, -4.0;
    const Eigen::VectorXd y = net.forward(x);
    CHECK(y(0) == 3.25);
    CHECK(y(1) == 3.25);

    const Eigen::MatrixXd g = net.input_gradient(x);
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softplus saturates to the identity at large inputs") {
    const double x = 20.0;
    const double softplus = std::log1p(std::exp(-x)) + x;
    CHECK(std::abs(softplus - x) < 1e-8);

    MlpNetwork net = linear_chain(Eigen::VectorXd::Ones(1), 20.0);
    CHECK(std::abs(net.value(std::vector<double>{20.0}) - 40.0) < 1e-8);
}

TEST_CASE("hand-set linear chain has gradient w everywhere") {
    Eigen::VectorXd w(3);
    w << 2.0, -1.0, 0.5;
    MlpNetwork net = linear_chain(w, 0.7);
    RngEngine rng = make_stream(1, 1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(1, 3);
        x << u(rng), u(rng), u(rng);
        CHECK(net.forward_inference(x)(0) == doctest::Approx(w.dot(x.row(0)) + 0.7).epsilon(1e-12));
        const Eigen::MatrixXd g = net.input_gradient(x);
        for (Eigen::Index i = 0; i < 3; ++i) CHECK(g(0, i) == doctest::Approx(w(i)).epsilon(1e-12));
    }
}

TEST_CASE("input gradients match finite differences on a random network") {
    MlpNetwork net = MlpNetwork::init({4, {12, 10}, Activation::kSoftplus, true, true}, 11);
    RngEngine rng = make_stream(2, 2);
    std::normal_distribution<double> noise(0.0, 0.4);
    for (Eigen::Index i = 0; i < net.param_count(); ++i) net.params()(i) += noise(rng);
    net.set_mode(NetMode::kInference);

    const double h = 1e-4;
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd x(1, 4);
        for (int i = 0; i < 4; ++i) x(0, i) = u(rng);
        const Eigen::MatrixXd g = net.input_gradient(x);
        for (int i = 0; i < 4; ++i) {
            Eigen::MatrixXd hi = x, lo = x;
            hi(0, i) += h;
            lo(0, i) -= h;
            const double fd = (net.forward_inference(hi)(0) - net.forward_inference(lo)(0)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g(0, i)) / std::max(std::abs(fd) + std::abs(g(0, i)), 1e-6));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("mode rules: gradients need inference, training needs a real batch") {
    MlpNetwork net = MlpNetwork::init({2, {4, 4}, Activation::kSigmoid, true, true}, 5);
    Eigen::MatrixXd x(1, 2);
    x << 0.0, 0.0;
    CHECK(net.mode() == NetMode::kTraining);
    CHECK_THROWS_AS(net.input_gradient(x), ModeError);
    CHECK_THROWS_AS(net.forward(x), ShapeError);  // single row has no batch statistics
    Eigen::MatrixXd wide(2, 3);
    wide.setZero();
    CHECK_THROWS_AS(net.forward(wide), ShapeError);
}

TEST_CASE("inference values do not depend on batch composition") {
    MlpNetwork net = MlpNetwork::init({3, {20, 20}, Activation::kSoftplus, true, true}, 6);
    RngEngine rng = make_stream(3, 3);
    std::uniform_real_distribution<double> u(-1.0, 5.0);
    Eigen::MatrixXd warm(32, 3);
    for (Eigen::Index r = 0; r < warm.rows(); ++r)
        for (Eigen::Index c = 0; c < 3; ++c) warm(r, c) = u(rng);
    net.forward(warm);  // move the running statistics off their defaults
    net.set_mode(NetMode::kInference);

    Eigen::MatrixXd batch(16, 3);
    for (Eigen::Index r = 0; r < batch.rows(); ++r)
        for (Eigen::Index c = 0; c < 3; ++c) batch(r, c) = u(rng);
    const Eigen::VectorXd together = net.forward(batch);
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        const double alone = net.forward(batch.row(r))(0);
        CHECK(std::abs(alone - together(r)) < 1e-12);
    }
}

TEST_CASE("training-mode forward folds batch moments into running statistics") {
    MlpNetwork net = MlpNetwork::init({1, {4, 4}, Activation::kSigmoid, true, true}, 9);
    Eigen::MatrixXd probe(1, 1);
    probe << 0.5;
    net.set_mode(NetMode::kInference);
    const double before = net.forward(probe)(0);
    net.set_mode(NetMode::kTraining);
    Eigen::MatrixXd batch(64, 1);
    for (int i = 0; i < 64; ++i) batch(i, 0) = 10.0 + 0.1 * i;
    net.forward(batch);
    net.set_mode(NetMode::kInference);
    CHECK(net.forward(probe)(0) != before);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    MlpNetwork net = MlpNetwork::init({2, {13, 9}, Activation::kSigmoid, true, true}, 77);
    RngEngine rng = make_stream(4, 4);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < net.param_count(); ++i) net.params()(i) += noise(rng);
    Eigen::MatrixXd warm(16, 2);
    for (Eigen::Index r = 0; r < warm.rows(); ++r)
        for (Eigen::Index c = 0; c < 2; ++c) warm(r, c) = noise(rng);
    net.forward(warm);
    net.set_mode(NetMode::kInference);

    const auto file = std::filesystem::temp_directory_path() / "pide_test_net.ckpt";
    net.save(file);
    const MlpNetwork loaded = MlpNetwork::load(file);
    CHECK(loaded.architecture() == net.architecture());
    CHECK(loaded.mode() == NetMode::kInference);
    CHECK(loaded.params() == net.params());
    Eigen::MatrixXd x(1, 2);
    x << 0.37, -1.2;
    CHECK(loaded.forward_inference(x)(0) == net.forward_inference(x)(0));
    std::filesystem::remove(file);
}
