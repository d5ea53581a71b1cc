#include "pide/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace pide {

double TrainConfig::learning_rate(long epoch) const {
    double lr = lr_schedule.front().second;
    for (const auto& [start, rate] : lr_schedule)
        if (epoch >= start) lr = rate;
    return lr;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (minibatch_size < 2) throw std::invalid_argument("TrainConfig: minibatch_size must be >= 2");
    if (lr_schedule.empty() || lr_schedule.front().first != 0)
        throw std::invalid_argument("TrainConfig: lr schedule must start at epoch 0");
    long prev = -1;
    for (const auto& [start, rate] : lr_schedule) {
        if (start <= prev) throw std::invalid_argument("TrainConfig: lr schedule thresholds must increase");
        if (!(rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rates must be positive");
        prev = start;
    }
}

std::vector<std::pair<long, double>> scale_schedule(const std::vector<std::pair<long, double>>& schedule,
                                                    double factor) {
    std::vector<std::pair<long, double>> out;
    out.reserve(schedule.size());
    for (const auto& [start, rate] : schedule)
        out.emplace_back(static_cast<long>(std::llround(start * factor)), rate);
    return out;
}

TrainingError::TrainingError(long epoch_, double lr_, const std::string& diagnostic)
    : std::runtime_error("training aborted at epoch " + std::to_string(epoch_) + " (lr " +
                         std::to_string(lr_) + "): " + diagnostic),
      epoch(epoch_),
      lr(lr_) {}

std::vector<EpochLog> train(MlpNetwork& net, const BatchStream& stream, const TrainConfig& cfg) {
    cfg.validate();
    net.set_mode(NetMode::kTraining);

    Eigen::VectorXd grad(net.param_count());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(net.param_count());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(net.param_count());
    std::vector<EpochLog> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs));

    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto tick = std::chrono::steady_clock::now();
        stream(epoch, inputs, targets);
        const double lr = cfg.learning_rate(epoch);
        const double loss = net.loss_and_param_gradient(inputs, targets, grad, /*update_running=*/true);
        if (std::isnan(loss)) {
            std::ostringstream diag;
            diag << "NaN loss; batch " << inputs.rows() << "x" << inputs.cols()
                 << ", target mean " << targets.mean();
            throw TrainingError(epoch, lr, diag.str());
        }

        const double t = static_cast<double>(epoch + 1);
        const double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
        const double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
        net.params().array() -=
            lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + cfg.adam_epsilon);

        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tick).count();
        history.push_back({epoch, loss, lr, ms});
    }
    net.set_mode(NetMode::kInference);
    return history;
}

}  // namespace pide
