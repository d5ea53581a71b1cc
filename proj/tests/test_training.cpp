#include <doctest.h>

#include <cmath>

#include "pide/rng.hpp"
#include "pide/train.hpp"

using namespace pide;

namespace {

BatchStream uniform_stream(std::uint64_t seed, Eigen::Index batch, Eigen::Index dim,
                           std::function<double(const Eigen::RowVectorXd&)> target) {
    return [=](long epoch, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        RngEngine rng = make_stream(seed, static_cast<std::uint64_t>(epoch));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        X.resize(batch, dim);
        y.resize(batch);
        for (Eigen::Index r = 0; r < batch; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) X(r, c) = u(rng);
            y(r) = target(X.row(r));
        }
    };
}

}  // namespace

TEST_CASE("learning-rate schedule steps at its thresholds") {
    TrainConfig cfg;
    cfg.lr_schedule = {{0, 0.1}, {2000, 0.01}, {4000, 1e-3}, {6000, 1e-4}};
    CHECK(cfg.learning_rate(0) == 0.1);
    CHECK(cfg.learning_rate(1999) == 0.1);
    CHECK(cfg.learning_rate(2000) == 0.01);
    CHECK(cfg.learning_rate(2500) == 0.01);
    CHECK(cfg.learning_rate(4000) == 1e-3);
    CHECK(cfg.learning_rate(99999) == 1e-4);

    const auto scaled = scale_schedule(cfg.lr_schedule, 0.4);
    CHECK(scaled[1].first == 800);
    CHECK(scaled[3].first == 2400);
    CHECK(scaled[1].second == 0.01);

    TrainConfig bad = cfg;
    bad.lr_schedule = {{10, 0.1}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.lr_schedule = {{0, 0.1}, {5, -1.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("constant targets are fit to high accuracy") {
    MlpNetwork net = MlpNetwork::init({1, {16, 16}, Activation::kSoftplus, true, true}, 1);
    TrainConfig cfg;
    cfg.epochs = 2000;
    cfg.minibatch_size = 256;
    cfg.lr_schedule = {{0, 0.1}, {800, 0.01}, {1400, 1e-3}, {1750, 1e-4}};
    cfg.seed = 5;
    auto history = train(net, uniform_stream(11, 256, 1, [](const Eigen::RowVectorXd&) { return 5.0; }), cfg);
    CHECK(history.size() == 2000);
    CHECK(history.back().loss < 1e-4);
    CHECK(net.mode() == NetMode::kInference);
    CHECK(net.value(std::vector<double>{0.31}) == doctest::Approx(5.0).epsilon(2e-3));
}

TEST_CASE("a linear map is learned to 1e-2 on a held-out grid") {
    // normalization off: the plain softplus stack can represent the plane
    // exactly and trains deep at a gentler initial rate
    MlpNetwork net = MlpNetwork::init({2, {24, 24}, Activation::kSoftplus, false, false}, 2);
    TrainConfig cfg;
    cfg.epochs = 3000;
    cfg.minibatch_size = 512;
    cfg.lr_schedule = {{0, 0.01}, {1000, 1e-3}, {2000, 1e-4}, {2500, 1e-5}};
    cfg.seed = 6;
    auto target = [](const Eigen::RowVectorXd& x) { return 2.0 * x(0) - x(1); };
    auto history = train(net, uniform_stream(12, 512, 2, target), cfg);

    double worst = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const double x1 = i / 20.0, x2 = j / 20.0;
            worst = std::max(worst, std::abs(net.value(std::vector<double>{x1, x2}) - (2.0 * x1 - x2)));
        }
    CHECK(worst < 1e-2);

    // loss trend: cumulative minimum is non-increasing and the fit improved
    double running = history.front().loss;
    for (const auto& e : history) running = std::min(running, e.loss);
    CHECK(running <= history.front().loss);
    CHECK(history.back().loss <= history.front().loss);
}

TEST_CASE("training twice with one seed gives identical parameters") {
    auto run = [] {
        MlpNetwork net = MlpNetwork::init({1, {8, 8}, Activation::kSigmoid, true, true}, 3);
        TrainConfig cfg;
        cfg.epochs = 50;
        cfg.minibatch_size = 64;
        cfg.lr_schedule = {{0, 0.1}};
        cfg.seed = 7;
        train(net, uniform_stream(13, 64, 1, [](const Eigen::RowVectorXd& x) { return x(0); }), cfg);
        return net;
    };
    const MlpNetwork a = run(), b = run();
    CHECK(a.params() == b.params());
}

TEST_CASE("nan loss aborts with the epoch in the diagnostic") {
    MlpNetwork net = MlpNetwork::init({1, {4, 4}, Activation::kSigmoid, true, true}, 4);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.minibatch_size = 8;
    cfg.lr_schedule = {{0, 0.1}};
    BatchStream poisoned = [](long epoch, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        X = Eigen::MatrixXd::Random(8, 1);
        y = Eigen::VectorXd::Constant(8, epoch >= 3 ? std::nan("") : 1.0);
    };
    try {
        train(net, poisoned, cfg);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(e.epoch == 3);
        CHECK(std::string(e.what()).find("NaN") != std::string::npos);
    }
}
