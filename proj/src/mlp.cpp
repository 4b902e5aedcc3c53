#include "reachguard/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace reachguard {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double activation_value(Activation act, double x) {
    if (act == Activation::Relu) return x > 0.0 ? x : 0.0;
    return x * 0.5 * (1.0 + std::erf(x * kInvSqrt2));
}

double activation_derivative(Activation act, double x) {
    if (act == Activation::Relu) return x > 0.0 ? 1.0 : 0.0;
    const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Mlp::Mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed) : act_(act) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument("Mlp: widths must be positive");
    Rng rng(seed, 0xA11CE);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l], fan_out = widths[l + 1];
        Mat W(fan_out, fan_in);
        const double scale = std::sqrt(1.0 / fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) W(r, c) = scale * rng.normal();
        weights_.push_back(std::move(W));
        biases_.push_back(Vec::Zero(fan_out));
    }
}

Vec Mlp::forward(const Vec& x) const {
    if (x.size() != input_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    Vec v = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        v = (weights_[l] * v + biases_[l]).eval();
        if (l + 1 < weights_.size())
            for (int i = 0; i < v.size(); ++i) v[i] = activation_value(act_, v[i]);
    }
    return v;
}

Mat Mlp::forward_batch(const Mat& X) const {
    if (X.rows() != input_dim()) throw std::invalid_argument("Mlp::forward_batch: input dimension mismatch");
    Mat V = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        V = (weights_[l] * V).colwise() + biases_[l];
        if (l + 1 < weights_.size())
            V = V.unaryExpr([this](double z) { return activation_value(act_, z); });
    }
    return V;
}

Mat Mlp::input_jacobian(const Vec& x) const {
    if (x.size() != input_dim()) throw std::invalid_argument("Mlp::input_jacobian: input dimension mismatch");
    // Forward pass storing pre-activations, then chain the jacobian.
    std::vector<Vec> pre(weights_.size());
    Vec v = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        pre[l] = weights_[l] * v + biases_[l];
        v = pre[l];
        if (l + 1 < weights_.size())
            for (int i = 0; i < v.size(); ++i) v[i] = activation_value(act_, v[i]);
    }
    Mat J = weights_[0];
    for (std::size_t l = 1; l < weights_.size(); ++l) {
        Vec d = pre[l - 1];
        for (int i = 0; i < d.size(); ++i) d[i] = activation_derivative(act_, d[i]);
        J = weights_[l] * d.asDiagonal() * J;
    }
    return J;
}

double Mlp::loss_and_gradients(const Mat& X, const Mat& Y, std::vector<Mat>& dW,
                               std::vector<Vec>& db) const {
    if (X.cols() != Y.cols()) throw std::invalid_argument("loss_and_gradients: batch size mismatch");
    if (X.rows() != input_dim() || Y.rows() != output_dim())
        throw std::invalid_argument("loss_and_gradients: dimension mismatch");
    const int L = num_layers();
    const double batch = static_cast<double>(X.cols());

    std::vector<Mat> act(static_cast<std::size_t>(L) + 1);  // post-activation values
    std::vector<Mat> pre(static_cast<std::size_t>(L));
    act[0] = X;
    for (int l = 0; l < L; ++l) {
        pre[static_cast<std::size_t>(l)] =
            (weights_[static_cast<std::size_t>(l)] * act[static_cast<std::size_t>(l)]).colwise() +
            biases_[static_cast<std::size_t>(l)];
        if (l + 1 < L)
            act[static_cast<std::size_t>(l) + 1] = pre[static_cast<std::size_t>(l)].unaryExpr(
                [this](double z) { return activation_value(act_, z); });
        else
            act[static_cast<std::size_t>(l) + 1] = pre[static_cast<std::size_t>(l)];
    }

    const Mat err = act[static_cast<std::size_t>(L)] - Y;
    const double denom = batch * static_cast<double>(Y.rows());
    const double loss = err.squaredNorm() / denom;

    dW.assign(static_cast<std::size_t>(L), Mat());
    db.assign(static_cast<std::size_t>(L), Vec());
    Mat delta = (2.0 / denom) * err;
    for (int l = L - 1; l >= 0; --l) {
        dW[static_cast<std::size_t>(l)] = delta * act[static_cast<std::size_t>(l)].transpose();
        db[static_cast<std::size_t>(l)] = delta.rowwise().sum();
        if (l > 0) {
            const Mat dact = pre[static_cast<std::size_t>(l) - 1].unaryExpr(
                [this](double z) { return activation_derivative(act_, z); });
            delta = (weights_[static_cast<std::size_t>(l)].transpose() * delta).cwiseProduct(dact);
        }
    }
    return loss;
}

TrainResult train(Mlp& net, const Mat& X, const Mat& Y, const Mat& Xval, const Mat& Yval,
                  const TrainConfig& cfg) {
    if (cfg.epochs < 0 || cfg.batch_size < 1) throw std::invalid_argument("train: bad schedule");
    if (cfg.epochs == 0) return {};  // zero-epoch train leaves the net unchanged
    const int n = static_cast<int>(X.cols());
    if (n == 0) throw std::invalid_argument("train: empty training set");

    const int L = net.num_layers();
    std::vector<Mat> mW(static_cast<std::size_t>(L)), vW(static_cast<std::size_t>(L));
    std::vector<Vec> mb(static_cast<std::size_t>(L)), vb(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        mW[static_cast<std::size_t>(l)] = Mat::Zero(net.weights()[static_cast<std::size_t>(l)].rows(),
                                                    net.weights()[static_cast<std::size_t>(l)].cols());
        vW[static_cast<std::size_t>(l)] = mW[static_cast<std::size_t>(l)];
        mb[static_cast<std::size_t>(l)] = Vec::Zero(net.biases()[static_cast<std::size_t>(l)].size());
        vb[static_cast<std::size_t>(l)] = mb[static_cast<std::size_t>(l)];
    }

    TrainResult result;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<Mat> dW;
    std::vector<Vec> db;
    long step = 0;
    double best_val = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the epoch-specific stream.
        Rng rng(cfg.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(epoch));
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[static_cast<std::size_t>(i)],
                      perm[static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1))]);

        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int bs = std::min(cfg.batch_size, n - start);
            Mat Xb(X.rows(), bs), Yb(Y.rows(), bs);
            for (int c = 0; c < bs; ++c) {
                Xb.col(c) = X.col(perm[static_cast<std::size_t>(start + c)]);
                Yb.col(c) = Y.col(perm[static_cast<std::size_t>(start + c)]);
            }
            const double batch_loss = net.loss_and_gradients(Xb, Yb, dW, db);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch offset " + std::to_string(start) +
                                         " (diverged — lower the learning rate)");
            epoch_loss += batch_loss;
            ++batches;
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (int l = 0; l < L; ++l) {
                auto& W = net.weights()[static_cast<std::size_t>(l)];
                auto& bvec = net.biases()[static_cast<std::size_t>(l)];
                auto& gW = dW[static_cast<std::size_t>(l)];
                auto& gb = db[static_cast<std::size_t>(l)];
                mW[static_cast<std::size_t>(l)] =
                    cfg.beta1 * mW[static_cast<std::size_t>(l)] + (1.0 - cfg.beta1) * gW;
                vW[static_cast<std::size_t>(l)] = cfg.beta2 * vW[static_cast<std::size_t>(l)] +
                                                  (1.0 - cfg.beta2) * gW.cwiseProduct(gW);
                mb[static_cast<std::size_t>(l)] =
                    cfg.beta1 * mb[static_cast<std::size_t>(l)] + (1.0 - cfg.beta1) * gb;
                vb[static_cast<std::size_t>(l)] = cfg.beta2 * vb[static_cast<std::size_t>(l)] +
                                                  (1.0 - cfg.beta2) * gb.cwiseProduct(gb);
                // Decoupled weight decay applies to weights only.
                const Mat denomW = (vW[static_cast<std::size_t>(l)] / bc2).cwiseSqrt() +
                                   Mat::Constant(W.rows(), W.cols(), cfg.eps);
                W -= cfg.lr * ((mW[static_cast<std::size_t>(l)] / bc1).cwiseQuotient(denomW) +
                               cfg.weight_decay * W);
                bvec -= cfg.lr * (mb[static_cast<std::size_t>(l)] / bc1)
                                     .cwiseQuotient((vb[static_cast<std::size_t>(l)] / bc2).cwiseSqrt() +
                                                    Vec::Constant(bvec.size(), cfg.eps));
            }
        }
        result.train_loss.push_back(epoch_loss / std::max(1, batches));

        if (Xval.cols() > 0) {
            const Mat pred = net.forward_batch(Xval);
            result.val_loss.push_back((pred - Yval).squaredNorm() /
                                      (static_cast<double>(Yval.cols()) * Yval.rows()));
            if (result.val_loss.back() < best_val - 1e-15) {
                best_val = result.val_loss.back();
                stale_epochs = 0;
            } else if (cfg.patience > 0 && ++stale_epochs >= cfg.patience) {
                break;
            }
        }
        if (cfg.log_every_epochs > 0 && (epoch + 1) % cfg.log_every_epochs == 0) {
            std::printf("epoch %d/%d train %.6g%s%s\n", epoch + 1, cfg.epochs,
                        result.train_loss.back(), Xval.cols() > 0 ? " val " : "",
                        Xval.cols() > 0 ? std::to_string(result.val_loss.back()).c_str() : "");
            std::fflush(stdout);
        }
    }
    return result;
}

double grad_check(const Mlp& net, std::uint64_t seed, double h, double kink_tol) {
    Mlp probe = net;
    Rng rng(seed, 0x6C0DE);
    const int in = probe.input_dim(), out = probe.output_dim();

    // Sample an input/target pair; for ReLU keep pre-activations away from
    // the kink so central differences see a smooth function.
    Mat X(in, 4), Y(out, 4);
    for (int attempt = 0; attempt < 200; ++attempt) {
        for (int c = 0; c < 4; ++c)
            for (int r = 0; r < in; ++r) X(r, c) = rng.uniform(-1.0, 1.0);
        for (int c = 0; c < 4; ++c)
            for (int r = 0; r < out; ++r) Y(r, c) = rng.uniform(-1.0, 1.0);
        if (probe.activation() != Activation::Relu) break;
        bool clear = true;
        for (int c = 0; c < 4 && clear; ++c) {
            Vec v = X.col(c);
            for (int l = 0; l < probe.num_layers() - 1 && clear; ++l) {
                v = probe.weights()[static_cast<std::size_t>(l)] * v +
                    probe.biases()[static_cast<std::size_t>(l)];
                if ((v.array().abs() < kink_tol).any()) clear = false;
                for (int i = 0; i < v.size(); ++i) v[i] = activation_value(Activation::Relu, v[i]);
            }
        }
        if (clear) break;
    }

    std::vector<Mat> dW;
    std::vector<Vec> db;
    probe.loss_and_gradients(X, Y, dW, db);

    double max_grad = 1e-12;
    for (const auto& g : dW) max_grad = std::max(max_grad, g.cwiseAbs().maxCoeff());
    for (const auto& g : db) max_grad = std::max(max_grad, g.cwiseAbs().maxCoeff());

    std::vector<Mat> unused_w;
    std::vector<Vec> unused_b;
    double max_err = 0.0;
    const auto loss_at = [&]() { return probe.loss_and_gradients(X, Y, unused_w, unused_b); };
    for (int l = 0; l < probe.num_layers(); ++l) {
        auto& W = probe.weights()[static_cast<std::size_t>(l)];
        for (int r = 0; r < W.rows(); ++r) {
            for (int c = 0; c < W.cols(); ++c) {
                const double keep = W(r, c);
                W(r, c) = keep + h;
                const double fp = loss_at();
                W(r, c) = keep - h;
                const double fm = loss_at();
                W(r, c) = keep;
                const double fd = (fp - fm) / (2.0 * h);
                max_err = std::max(max_err,
                                   std::abs(fd - dW[static_cast<std::size_t>(l)](r, c)) / max_grad);
            }
        }
        auto& bvec = probe.biases()[static_cast<std::size_t>(l)];
        for (int r = 0; r < bvec.size(); ++r) {
            const double keep = bvec[r];
            bvec[r] = keep + h;
            const double fp = loss_at();
            bvec[r] = keep - h;
            const double fm = loss_at();
            bvec[r] = keep;
            const double fd = (fp - fm) / (2.0 * h);
            max_err = std::max(max_err, std::abs(fd - db[static_cast<std::size_t>(l)][r]) / max_grad);
        }
    }
    return max_err;
}

// ------------------------------------------------------------ checkpoint IO

namespace {
constexpr char kMagic[8] = {'R', 'G', 'M', 'L', 'P', '0', '0', '1'};
}

void save_checkpoint(const Mlp& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::int32_t act = net.activation() == Activation::Relu ? 0 : 1;
    const std::int32_t layers = net.num_layers();
    out.write(reinterpret_cast<const char*>(&act), 4);
    out.write(reinterpret_cast<const char*>(&layers), 4);
    for (int l = 0; l < layers; ++l) {
        const Mat& W = net.weights()[static_cast<std::size_t>(l)];
        const Vec& b = net.biases()[static_cast<std::size_t>(l)];
        const std::int32_t rows = static_cast<std::int32_t>(W.rows());
        const std::int32_t cols = static_cast<std::int32_t>(W.cols());
        out.write(reinterpret_cast<const char*>(&rows), 4);
        out.write(reinterpret_cast<const char*>(&cols), 4);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const double v = W(r, c);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
        for (int r = 0; r < rows; ++r) {
            const double v = b[r];
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

Mlp load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    std::int32_t act = 0, layers = 0;
    in.read(reinterpret_cast<char*>(&act), 4);
    in.read(reinterpret_cast<char*>(&layers), 4);
    if (!in || layers < 1 || layers > 1024) throw std::runtime_error("load_checkpoint: corrupt header");

    Mlp net;
    // Reconstruct through a dummy then overwrite: build widths as we read.
    std::vector<Mat> Ws;
    std::vector<Vec> bs;
    for (int l = 0; l < layers; ++l) {
        std::int32_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), 4);
        in.read(reinterpret_cast<char*>(&cols), 4);
        if (!in || rows < 1 || cols < 1) throw std::runtime_error("load_checkpoint: corrupt layer header");
        Mat W(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                double v = 0;
                in.read(reinterpret_cast<char*>(&v), 8);
                W(r, c) = v;
            }
        Vec b(rows);
        for (int r = 0; r < rows; ++r) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            b[r] = v;
        }
        if (!in) throw std::runtime_error("load_checkpoint: truncated data");
        Ws.push_back(std::move(W));
        bs.push_back(std::move(b));
    }
    std::vector<int> widths;
    widths.push_back(static_cast<int>(Ws.front().cols()));
    for (const auto& W : Ws) widths.push_back(static_cast<int>(W.rows()));
    net = Mlp(widths, act == 0 ? Activation::Relu : Activation::Gelu, 0);
    net.weights() = std::move(Ws);
    net.biases() = std::move(bs);
    return net;
}

}  // namespace reachguard
