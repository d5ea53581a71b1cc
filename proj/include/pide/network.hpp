#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>

namespace pide {

enum class Activation { kSoftplus, kSigmoid };
enum class NetMode { kTraining, kInference };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

/// Two hidden layers, scalar output with identity head. Batch normalization
/// acts on the raw input and on each hidden pre-activation.
struct MlpArchitecture {
    Eigen::Index input_dim = 1;
    std::array<Eigen::Index, 2> hidden = {50, 50};
    Activation activation = Activation::kSoftplus;
    bool batch_norm = true;
    bool normalize_input = true;

    void validate() const;
    bool operator==(const MlpArchitecture&) const = default;
};

/// Fixed-architecture feed-forward network U with explicit parameter vector.
///
/// Training mode normalizes with batch statistics (and can fold the batch
/// moments into the running statistics); inference mode is a fixed
/// deterministic function using the frozen running statistics. Input
/// gradients are defined in inference mode only.
class MlpNetwork {
public:
    MlpNetwork() = default;

    /// Xavier-uniform weights, zero biases, unit scale / zero shift
    /// normalization, running stats (0, 1). Deterministic given seed.
    static MlpNetwork init(const MlpArchitecture& arch, std::uint64_t seed);

    const MlpArchitecture& architecture() const { return arch_; }
    NetMode mode() const { return mode_; }
    void set_mode(NetMode m) { mode_ = m; }

    /// Batch forward pass, rows are samples. Training mode requires >= 2 rows,
    /// normalizes with batch statistics and folds them into the running
    /// statistics (momentum 0.9); inference mode uses the frozen running
    /// statistics and leaves the network untouched.
    Eigen::VectorXd forward(const Eigen::MatrixXd& inputs);
    Eigen::VectorXd forward_inference(const Eigen::MatrixXd& inputs) const;

    double value(std::span<const double> x) const;

    /// Exact reverse-mode gradient of the output w.r.t. each input
    /// coordinate; inference mode only.
    Eigen::MatrixXd input_gradient(const Eigen::MatrixXd& inputs) const;
    void input_gradient(std::span<const double> x, std::span<double> out) const;

    /// MSE loss over the batch with batch-statistics normalization. Pure.
    double training_loss(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) const;

    /// Loss plus gradient w.r.t. the flat parameter vector (reverse mode
    /// through the batch statistics). update_running folds the batch moments
    /// into the running statistics with momentum 0.9.
    double loss_and_param_gradient(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                   Eigen::VectorXd& grad, bool update_running = false);

    Eigen::VectorXd& params() { return theta_; }
    const Eigen::VectorXd& params() const { return theta_; }
    Eigen::Index param_count() const { return theta_.size(); }

    void save(const std::filesystem::path& file) const;
    static MlpNetwork load(const std::filesystem::path& file);

    struct ForwardCache;  // batch-statistics caches shared with the backward pass

private:
    struct Layout {
        Eigen::Index g0 = -1, be0 = -1;
        Eigen::Index w1 = 0, b1 = 0, g1 = -1, be1 = -1;
        Eigen::Index w2 = 0, b2 = 0, g2 = -1, be2 = -1;
        Eigen::Index wo = 0, bo = 0;
        Eigen::Index total = 0;
        Eigen::Index rm0 = -1, rv0 = -1, rm1 = -1, rv1 = -1, rm2 = -1, rv2 = -1;
        Eigen::Index rtotal = 0;
    };
    static Layout make_layout(const MlpArchitecture& arch);

    void forward_train(const Eigen::MatrixXd& X, ForwardCache& cache) const;
    void fold_running_stats(const ForwardCache& cache);

    MlpArchitecture arch_;
    Layout lay_;
    Eigen::VectorXd theta_;    // trainable parameters
    Eigen::VectorXd running_;  // running normalization statistics
    NetMode mode_ = NetMode::kTraining;

    friend struct NetworkAccess;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ModeError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace pide
