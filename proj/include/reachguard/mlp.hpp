#pragma once

// Dense feedforward regressors trained from scratch: hidden layers share one
// activation (ReLU, or GELU in its exact error-function form), the output
// layer is linear, the loss is mean squared error, and the optimizer is
// decoupled-weight-decay Adam.  Everything is deterministic given the seed.

#include "reachguard/polyzonotope.hpp"
#include "reachguard/rng.hpp"

#include <string>
#include <vector>

namespace reachguard {

enum class Activation { Relu, Gelu };

double activation_value(Activation act, double x);
double activation_derivative(Activation act, double x);

class Mlp {
  public:
    Mlp() = default;
    // widths = {input, hidden..., output}; weights ~ N(0, 1/fan_in).
    Mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed);

    int input_dim() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().cols()); }
    int output_dim() const { return weights_.empty() ? 0 : static_cast<int>(weights_.back().rows()); }
    int num_layers() const { return static_cast<int>(weights_.size()); }
    Activation activation() const { return act_; }

    Vec forward(const Vec& x) const;
    Mat forward_batch(const Mat& X) const;  // columns are samples

    // Jacobian of outputs with respect to the input (exact backprop).
    Mat input_jacobian(const Vec& x) const;

    std::vector<Mat>& weights() { return weights_; }
    std::vector<Vec>& biases() { return biases_; }
    const std::vector<Mat>& weights() const { return weights_; }
    const std::vector<Vec>& biases() const { return biases_; }

    // MSE over the batch (mean over samples and output coordinates) and its
    // gradient with respect to every weight and bias.
    double loss_and_gradients(const Mat& X, const Mat& Y, std::vector<Mat>& dW,
                              std::vector<Vec>& db) const;

  private:
    std::vector<Mat> weights_;
    std::vector<Vec> biases_;
    Activation act_ = Activation::Gelu;
};

struct TrainConfig {
    int epochs = 10;
    int batch_size = 256;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    int log_every_epochs = 0;  // 0 silences progress lines
    int patience = 0;          // early stop after this many non-improving
                               // validation epochs (0 disables)
};

struct TrainResult {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch (empty when no val set)
};

// Columns of X/Y are samples.  Validation matrices may be empty.
TrainResult train(Mlp& net, const Mat& X, const Mat& Y, const Mat& Xval, const Mat& Yval,
                  const TrainConfig& cfg);

// Max relative error between analytic loss gradients and central differences
// (h = 1e-5), normalized by the largest gradient magnitude.  ReLU nets
// resample until every pre-activation is at least `kink_tol` from zero.
double grad_check(const Mlp& net, std::uint64_t seed, double h = 1e-5, double kink_tol = 1e-4);

// Versioned binary checkpoint (magic, activation, shapes, row-major f64).
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace reachguard
