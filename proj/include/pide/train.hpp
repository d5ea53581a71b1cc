#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pide/network.hpp"

namespace pide {

/// Adam settings and the staged learning-rate schedule. Schedule entries are
/// (first epoch, rate); the first entry must start at 0 and thresholds must
/// increase.
struct TrainConfig {
    long epochs = 4000;
    long minibatch_size = 1024;
    std::vector<std::pair<long, double>> lr_schedule = {{0, 0.1}, {800, 0.01}, {1600, 1e-3}, {2400, 1e-4}};
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    double learning_rate(long epoch) const;
    void validate() const;
};

/// Scales every schedule threshold by `factor` (used to shrink the
/// full-size schedule to desk-scale epoch counts).
std::vector<std::pair<long, double>> scale_schedule(const std::vector<std::pair<long, double>>& schedule,
                                                    double factor);

struct EpochLog {
    long epoch;
    double loss;
    double lr;
    double wall_ms;
};

/// Produces the minibatch for one epoch. Implementations are expected to be
/// deterministic functions of the epoch index (and their own seed).
using BatchStream = std::function<void(long epoch, Eigen::MatrixXd& inputs, Eigen::VectorXd& targets)>;

struct TrainingError : std::runtime_error {
    TrainingError(long epoch, double lr, const std::string& diagnostic);
    long epoch;
    double lr;
};

/// Runs cfg.epochs Adam steps on the mean-squared error, one fresh stream
/// batch per epoch; leaves the network in inference mode with frozen
/// statistics. Aborts with a TrainingError diagnostic on NaN loss.
std::vector<EpochLog> train(MlpNetwork& net, const BatchStream& stream, const TrainConfig& cfg);

}  // namespace pide
