#include "pide/network.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pide/rng.hpp"

namespace pide {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Eigen::ArrayXXd apply_activation(Activation a, const Eigen::ArrayXXd& z) {
    if (a == Activation::kSoftplus) return z.unaryExpr([](double v) { return softplus(v); });
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

// Derivative in terms of the pre-activation z.
Eigen::ArrayXXd activation_derivative(Activation a, const Eigen::ArrayXXd& z) {
    if (a == Activation::kSoftplus) return z.unaryExpr([](double v) { return sigmoid(v); });
    return z.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 - s);
    });
}

}  // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "softplus") return Activation::kSoftplus;
    if (s == "sigmoid") return Activation::kSigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) { return a == Activation::kSoftplus ? "softplus" : "sigmoid"; }

void MlpArchitecture::validate() const {
    if (input_dim < 1) throw std::invalid_argument("MlpArchitecture: input_dim must be >= 1");
    if (hidden[0] < 1 || hidden[1] < 1) throw std::invalid_argument("MlpArchitecture: hidden widths must be >= 1");
}

MlpNetwork::Layout MlpNetwork::make_layout(const MlpArchitecture& arch) {
    Layout l;
    const Eigen::Index d = arch.input_dim, h1 = arch.hidden[0], h2 = arch.hidden[1];
    Eigen::Index off = 0;
    auto take = [&off](Eigen::Index n) {
        Eigen::Index at = off;
        off += n;
        return at;
    };
    if (arch.normalize_input) {
        l.g0 = take(d);
        l.be0 = take(d);
    }
    l.w1 = take(h1 * d);
    l.b1 = take(h1);
    if (arch.batch_norm) {
        l.g1 = take(h1);
        l.be1 = take(h1);
    }
    l.w2 = take(h2 * h1);
    l.b2 = take(h2);
    if (arch.batch_norm) {
        l.g2 = take(h2);
        l.be2 = take(h2);
    }
    l.wo = take(h2);
    l.bo = take(1);
    l.total = off;

    Eigen::Index roff = 0;
    auto rtake = [&roff](Eigen::Index n) {
        Eigen::Index at = roff;
        roff += n;
        return at;
    };
    if (arch.normalize_input) {
        l.rm0 = rtake(d);
        l.rv0 = rtake(d);
    }
    if (arch.batch_norm) {
        l.rm1 = rtake(h1);
        l.rv1 = rtake(h1);
        l.rm2 = rtake(h2);
        l.rv2 = rtake(h2);
    }
    l.rtotal = roff;
    return l;
}

MlpNetwork MlpNetwork::init(const MlpArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    MlpNetwork net;
    net.arch_ = arch;
    net.lay_ = make_layout(arch);
    net.theta_ = Eigen::VectorXd::Zero(net.lay_.total);
    net.running_ = Eigen::VectorXd::Zero(net.lay_.rtotal);
    net.mode_ = NetMode::kTraining;

    const Eigen::Index d = arch.input_dim, h1 = arch.hidden[0], h2 = arch.hidden[1];
    RngEngine rng = make_stream(seed, 0x1417u);
    auto xavier = [&rng](Eigen::Map<Eigen::MatrixXd> w, Eigen::Index fan_in, Eigen::Index fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    };
    const Layout& l = net.lay_;
    xavier({net.theta_.data() + l.w1, h1, d}, d, h1);
    xavier({net.theta_.data() + l.w2, h2, h1}, h1, h2);
    xavier({net.theta_.data() + l.wo, h2, 1}, h2, 1);
    if (arch.normalize_input) net.theta_.segment(l.g0, d).setOnes();
    if (arch.batch_norm) {
        net.theta_.segment(l.g1, h1).setOnes();
        net.theta_.segment(l.g2, h2).setOnes();
    }
    if (arch.normalize_input) net.running_.segment(l.rv0, d).setOnes();
    if (arch.batch_norm) {
        net.running_.segment(l.rv1, h1).setOnes();
        net.running_.segment(l.rv2, h2).setOnes();
    }
    return net;
}

// ---------------------------------------------------------------------------
// forward / backward

struct MlpNetwork::ForwardCache {
    // batch-normalization caches per normalized block: batch mean, batch
    // variance (biased), inverse std, normalized values
    struct Bn {
        Eigen::RowVectorXd mean, var, invstd;
        Eigen::ArrayXXd xhat;
        bool active = false;
    };
    Eigen::MatrixXd x0;        // input after optional input normalization
    Bn bn0, bn1, bn2;
    Eigen::ArrayXXd z1, z2;    // pre-activations fed to the activation (post-BN)
    Eigen::ArrayXXd a1, a2;    // activations
    Eigen::VectorXd yhat;
    Eigen::Index batch = 0;
};

namespace {

// Normalize columns of X with batch statistics; gamma/beta scale and shift.
void bn_forward_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& gamma, const Eigen::VectorXd& beta,
                      MlpNetwork::ForwardCache::Bn& bn, Eigen::MatrixXd& out) {
    const double b = static_cast<double>(x.rows());
    bn.active = true;
    bn.mean = x.colwise().mean();
    bn.var = ((x.rowwise() - bn.mean).array().square().colwise().sum() / b).matrix();
    bn.invstd = (bn.var.array() + kBnEps).rsqrt().matrix();
    bn.xhat = (x.rowwise() - bn.mean).array().rowwise() * bn.invstd.array();
    out = ((bn.xhat.rowwise() * gamma.transpose().array()).rowwise() + beta.transpose().array()).matrix();
}

void bn_forward_inference(const Eigen::MatrixXd& x, const Eigen::VectorXd& gamma, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& rmean, const Eigen::VectorXd& rvar, Eigen::MatrixXd& out) {
    Eigen::ArrayXd invstd = (rvar.array() + kBnEps).rsqrt();
    Eigen::ArrayXd scale = gamma.array() * invstd;
    Eigen::ArrayXd shift = beta.array() - rmean.array() * scale;
    out = ((x.array().rowwise() * scale.transpose()).rowwise() + shift.transpose()).matrix();
}

// Reverse step through batch normalization. Returns gradient w.r.t. the
// un-normalized input; accumulates dgamma/dbeta.
Eigen::MatrixXd bn_backward(const Eigen::ArrayXXd& dout, const MlpNetwork::ForwardCache::Bn& bn,
                            const Eigen::VectorXd& gamma, Eigen::Ref<Eigen::VectorXd> dgamma,
                            Eigen::Ref<Eigen::VectorXd> dbeta) {
    const double b = static_cast<double>(dout.rows());
    dgamma = (dout * bn.xhat).colwise().sum().matrix().transpose();
    dbeta = dout.colwise().sum().matrix().transpose();
    Eigen::ArrayXXd dxhat = dout.rowwise() * gamma.transpose().array();
    Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum().matrix();
    Eigen::RowVectorXd sum_dxhat_xhat = (dxhat * bn.xhat).colwise().sum().matrix();
    Eigen::ArrayXXd dx = (dxhat * b).rowwise() - sum_dxhat.array();
    dx -= bn.xhat.rowwise() * sum_dxhat_xhat.array();
    dx = (dx.rowwise() * bn.invstd.array()) / b;
    return dx.matrix();
}

}  // namespace

void MlpNetwork::forward_train(const Eigen::MatrixXd& X, ForwardCache& c) const {
    if (X.cols() != arch_.input_dim) throw ShapeError("forward: input width mismatch");
    if (X.rows() < 2) throw ShapeError("forward: training mode needs a batch of >= 2 rows");
    const Layout& l = lay_;
    const Eigen::Index d = arch_.input_dim, h1 = arch_.hidden[0], h2 = arch_.hidden[1];
    c.batch = X.rows();

    if (arch_.normalize_input)
        bn_forward_train(X, theta_.segment(l.g0, d), theta_.segment(l.be0, d), c.bn0, c.x0);
    else
        c.x0 = X;

    Eigen::Map<const Eigen::MatrixXd> w1(theta_.data() + l.w1, h1, d);
    Eigen::MatrixXd z1 = (c.x0 * w1.transpose()).rowwise() + theta_.segment(l.b1, h1).transpose();
    if (arch_.batch_norm) {
        Eigen::MatrixXd z1n;
        bn_forward_train(z1, theta_.segment(l.g1, h1), theta_.segment(l.be1, h1), c.bn1, z1n);
        c.z1 = z1n.array();
    } else {
        c.z1 = z1.array();
    }
    c.a1 = apply_activation(arch_.activation, c.z1);

    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + l.w2, h2, h1);
    Eigen::MatrixXd z2 = (c.a1.matrix() * w2.transpose()).rowwise() + theta_.segment(l.b2, h2).transpose();
    if (arch_.batch_norm) {
        Eigen::MatrixXd z2n;
        bn_forward_train(z2, theta_.segment(l.g2, h2), theta_.segment(l.be2, h2), c.bn2, z2n);
        c.z2 = z2n.array();
    } else {
        c.z2 = z2.array();
    }
    c.a2 = apply_activation(arch_.activation, c.z2);

    c.yhat = c.a2.matrix() * theta_.segment(l.wo, h2);
    c.yhat.array() += theta_(l.bo);
}

void MlpNetwork::fold_running_stats(const ForwardCache& c) {
    const Layout& l = lay_;
    const double b = static_cast<double>(c.batch);
    const double unbias = b > 1.5 ? b / (b - 1.0) : 1.0;
    auto fold = [&](const ForwardCache::Bn& bn, Eigen::Index rm, Eigen::Index rv) {
        if (!bn.active) return;
        auto mean = running_.segment(rm, bn.mean.size());
        auto var = running_.segment(rv, bn.var.size());
        mean = kBnMomentum * mean + (1.0 - kBnMomentum) * bn.mean.transpose();
        var = kBnMomentum * var + (1.0 - kBnMomentum) * (unbias * bn.var.transpose());
    };
    fold(c.bn0, l.rm0, l.rv0);
    fold(c.bn1, l.rm1, l.rv1);
    fold(c.bn2, l.rm2, l.rv2);
}

Eigen::VectorXd MlpNetwork::forward_inference(const Eigen::MatrixXd& X) const {
    if (X.cols() != arch_.input_dim) throw ShapeError("forward: input width mismatch");
    const Layout& l = lay_;
    const Eigen::Index d = arch_.input_dim, h1 = arch_.hidden[0], h2 = arch_.hidden[1];

    Eigen::MatrixXd x0;
    if (arch_.normalize_input)
        bn_forward_inference(X, theta_.segment(l.g0, d), theta_.segment(l.be0, d), running_.segment(l.rm0, d),
                             running_.segment(l.rv0, d), x0);
    else
        x0 = X;

    Eigen::Map<const Eigen::MatrixXd> w1(theta_.data() + l.w1, h1, d);
    Eigen::MatrixXd z1 = (x0 * w1.transpose()).rowwise() + theta_.segment(l.b1, h1).transpose();
    if (arch_.batch_norm) {
        Eigen::MatrixXd z1n;
        bn_forward_inference(z1, theta_.segment(l.g1, h1), theta_.segment(l.be1, h1),
                             running_.segment(l.rm1, h1), running_.segment(l.rv1, h1), z1n);
        z1.swap(z1n);
    }
    Eigen::MatrixXd a1 = apply_activation(arch_.activation, z1.array()).matrix();

    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + l.w2, h2, h1);
    Eigen::MatrixXd z2 = (a1 * w2.transpose()).rowwise() + theta_.segment(l.b2, h2).transpose();
    if (arch_.batch_norm) {
        Eigen::MatrixXd z2n;
        bn_forward_inference(z2, theta_.segment(l.g2, h2), theta_.segment(l.be2, h2),
                             running_.segment(l.rm2, h2), running_.segment(l.rv2, h2), z2n);
        z2.swap(z2n);
    }
    Eigen::MatrixXd a2 = apply_activation(arch_.activation, z2.array()).matrix();

    Eigen::VectorXd out = a2 * theta_.segment(l.wo, h2);
    out.array() += theta_(l.bo);
    return out;
}

Eigen::VectorXd MlpNetwork::forward(const Eigen::MatrixXd& X) {
    if (mode_ == NetMode::kInference) return forward_inference(X);
    ForwardCache c;
    forward_train(X, c);
    fold_running_stats(c);
    return c.yhat;
}

double MlpNetwork::value(std::span<const double> x) const {
    Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
    return forward_inference(row)(0);
}

Eigen::MatrixXd MlpNetwork::input_gradient(const Eigen::MatrixXd& X) const {
    if (mode_ != NetMode::kInference)
        throw ModeError("input_gradient: defined in inference mode only");
    if (X.cols() != arch_.input_dim) throw ShapeError("input_gradient: input width mismatch");
    const Layout& l = lay_;
    const Eigen::Index d = arch_.input_dim, h1 = arch_.hidden[0], h2 = arch_.hidden[1];

    auto bn_scale = [&](Eigen::Index g, Eigen::Index rv, Eigen::Index n) -> Eigen::ArrayXd {
        return theta_.segment(g, n).array() * (running_.segment(rv, n).array() + kBnEps).rsqrt();
    };

    // Recompute the forward chain, keeping pre-activations.
    Eigen::MatrixXd x0 = X;
    Eigen::ArrayXd scale0;
    if (arch_.normalize_input) {
        scale0 = bn_scale(l.g0, l.rv0, d);
        Eigen::ArrayXd shift = theta_.segment(l.be0, d).array() - running_.segment(l.rm0, d).array() * scale0;
        x0 = ((X.array().rowwise() * scale0.transpose()).rowwise() + shift.transpose()).matrix();
    }
    Eigen::Map<const Eigen::MatrixXd> w1(theta_.data() + l.w1, h1, d);
    Eigen::MatrixXd z1 = (x0 * w1.transpose()).rowwise() + theta_.segment(l.b1, h1).transpose();
    Eigen::ArrayXd scale1;
    if (arch_.batch_norm) {
        scale1 = bn_scale(l.g1, l.rv1, h1);
        Eigen::ArrayXd shift = theta_.segment(l.be1, h1).array() - running_.segment(l.rm1, h1).array() * scale1;
        z1 = ((z1.array().rowwise() * scale1.transpose()).rowwise() + shift.transpose()).matrix();
    }
    Eigen::MatrixXd a1 = apply_activation(arch_.activation, z1.array()).matrix();

    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + l.w2, h2, h1);
    Eigen::MatrixXd z2 = (a1 * w2.transpose()).rowwise() + theta_.segment(l.b2, h2).transpose();
    Eigen::ArrayXd scale2;
    if (arch_.batch_norm) {
        scale2 = bn_scale(l.g2, l.rv2, h2);
        Eigen::ArrayXd shift = theta_.segment(l.be2, h2).array() - running_.segment(l.rm2, h2).array() * scale2;
        z2 = ((z2.array().rowwise() * scale2.transpose()).rowwise() + shift.transpose()).matrix();
    }

    // Reverse sweep: d out / d z2n, back through the affine BN maps.
    Eigen::ArrayXXd dz2 =
        activation_derivative(arch_.activation, z2.array()).rowwise() * theta_.segment(l.wo, h2).transpose().array();
    if (arch_.batch_norm) dz2 = dz2.rowwise() * scale2.transpose();
    Eigen::ArrayXXd da1 = (dz2.matrix() * w2).array();
    Eigen::ArrayXXd dz1 = da1 * activation_derivative(arch_.activation, z1.array());
    if (arch_.batch_norm) dz1 = dz1.rowwise() * scale1.transpose();
    Eigen::ArrayXXd dx = (dz1.matrix() * w1).array();
    if (arch_.normalize_input) dx = dx.rowwise() * scale0.transpose();
    return dx.matrix();
}

void MlpNetwork::input_gradient(std::span<const double> x, std::span<double> out) const {
    Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::MatrixXd g = input_gradient(Eigen::MatrixXd(row));
    for (Eigen::Index i = 0; i < g.cols(); ++i) out[i] = g(0, i);
}

double MlpNetwork::training_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    ForwardCache c;
    forward_train(X, c);
    return (c.yhat - y).squaredNorm() / static_cast<double>(X.rows());
}

double MlpNetwork::loss_and_param_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           Eigen::VectorXd& grad, bool update_running) {
    if (y.size() != X.rows()) throw ShapeError("loss_and_param_gradient: targets/batch size mismatch");
    const Layout& l = lay_;
    const Eigen::Index d = arch_.input_dim, h1 = arch_.hidden[0], h2 = arch_.hidden[1];
    ForwardCache c;
    forward_train(X, c);
    if (update_running) fold_running_stats(c);

    const double b = static_cast<double>(X.rows());
    const double loss = (c.yhat - y).squaredNorm() / b;

    grad.setZero(theta_.size());
    Eigen::VectorXd dyhat = 2.0 / b * (c.yhat - y);

    // output layer
    grad(l.bo) = dyhat.sum();
    grad.segment(l.wo, h2) = c.a2.matrix().transpose() * dyhat;
    Eigen::ArrayXXd da2 = (dyhat * theta_.segment(l.wo, h2).transpose()).array();  // B x h2

    Eigen::ArrayXXd dz2n = da2 * activation_derivative(arch_.activation, c.z2);
    Eigen::MatrixXd dz2;
    if (arch_.batch_norm)
        dz2 = bn_backward(dz2n, c.bn2, theta_.segment(l.g2, h2), grad.segment(l.g2, h2), grad.segment(l.be2, h2));
    else
        dz2 = dz2n.matrix();

    grad.segment(l.b2, h2) = dz2.colwise().sum().transpose();
    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + l.w2, h2, h1);
    Eigen::Map<Eigen::MatrixXd>(grad.data() + l.w2, h2, h1) = dz2.transpose() * c.a1.matrix();
    Eigen::ArrayXXd da1 = (dz2 * w2).array();

    Eigen::ArrayXXd dz1n = da1 * activation_derivative(arch_.activation, c.z1);
    Eigen::MatrixXd dz1;
    if (arch_.batch_norm)
        dz1 = bn_backward(dz1n, c.bn1, theta_.segment(l.g1, h1), grad.segment(l.g1, h1), grad.segment(l.be1, h1));
    else
        dz1 = dz1n.matrix();

    grad.segment(l.b1, h1) = dz1.colwise().sum().transpose();
    Eigen::Map<const Eigen::MatrixXd> w1(theta_.data() + l.w1, h1, d);
    Eigen::Map<Eigen::MatrixXd>(grad.data() + l.w1, h1, d) = dz1.transpose() * c.x0;

    if (arch_.normalize_input) {
        Eigen::ArrayXXd dx0 = (dz1 * w1).array();
        bn_backward(dx0, c.bn0, theta_.segment(l.g0, d), grad.segment(l.g0, d), grad.segment(l.be0, d));
    }
    return loss;
}

// ---------------------------------------------------------------------------
// checkpoint io (hexfloat, bit-exact round trip)

void MlpNetwork::save(const std::filesystem::path& file) const {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + file.string());
    os << "pide-mlp 1\n";
    os << "input_dim " << arch_.input_dim << "\n";
    os << "hidden " << arch_.hidden[0] << ' ' << arch_.hidden[1] << "\n";
    os << "activation " << to_string(arch_.activation) << "\n";
    os << "batch_norm " << (arch_.batch_norm ? 1 : 0) << "\n";
    os << "normalize_input " << (arch_.normalize_input ? 1 : 0) << "\n";
    os << "mode " << (mode_ == NetMode::kInference ? "inference" : "training") << "\n";
    char buf[48];
    auto dump = [&](const char* tag, const Eigen::VectorXd& v) {
        os << tag << ' ' << v.size() << "\n";
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%a", v(i));
            os << buf << "\n";
        }
    };
    dump("theta", theta_);
    dump("running", running_);
    if (!os) throw std::runtime_error("checkpoint write failed: " + file.string());
}

MlpNetwork MlpNetwork::load(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + file.string());
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "pide-mlp" || version != 1)
        throw std::runtime_error("bad checkpoint header in " + file.string());

    MlpArchitecture arch;
    std::string key, sval;
    int ival = 0;
    is >> key >> arch.input_dim;
    is >> key >> arch.hidden[0] >> arch.hidden[1];
    is >> key >> sval;
    arch.activation = activation_from_string(sval);
    is >> key >> ival;
    arch.batch_norm = ival != 0;
    is >> key >> ival;
    arch.normalize_input = ival != 0;
    is >> key >> sval;

    MlpNetwork net = MlpNetwork::init(arch, 0);
    net.mode_ = sval == "inference" ? NetMode::kInference : NetMode::kTraining;
    auto read_vec = [&](const char* tag, Eigen::VectorXd& v) {
        Eigen::Index n = 0;
        is >> key >> n;
        if (key != tag || n != v.size())
            throw std::runtime_error("corrupt checkpoint section '" + std::string(tag) + "' in " + file.string());
        std::string tok;
        for (Eigen::Index i = 0; i < n; ++i) {
            is >> tok;
            v(i) = std::strtod(tok.c_str(), nullptr);
        }
    };
    read_vec("theta", net.theta_);
    read_vec("running", net.running_);
    if (!is) throw std::runtime_error("corrupt checkpoint: " + file.string());
    const Layout& l = net.lay_;
    auto positive = [&](Eigen::Index off, Eigen::Index n) {
        return off < 0 || (net.running_.segment(off, n).array() > 0.0).all();
    };
    if (!positive(l.rv0, arch.input_dim) || !positive(l.rv1, arch.hidden[0]) || !positive(l.rv2, arch.hidden[1]))
        throw std::runtime_error("corrupt checkpoint: running variance not positive in " + file.string());
    return net;
}

}  // namespace pide
