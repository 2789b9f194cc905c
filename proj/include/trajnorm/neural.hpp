#pragma once

// Dense feed-forward networks trained with mini-batch RMSProp on a
// mean-squared-error reconstruction loss. Samples are rows of a batch matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajnorm/common.hpp"

namespace trajnorm {

enum class Activation { relu, sigmoid, identity };

std::string_view activation_name(Activation activation);
Activation parse_activation(std::string_view name);

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out_units x in_units
  VectorX<Scalar> biases;   // out_units
  Activation activation = Activation::identity;

  Eigen::Index in_units() const { return weights.cols(); }
  Eigen::Index out_units() const { return weights.rows(); }
  Eigen::Index parameter_count() const { return weights.size() + biases.size(); }
};

template <typename Scalar>
struct Network {
  std::vector<DenseLayer<Scalar>> layers;

  Eigen::Index input_size() const { return layers.empty() ? 0 : layers.front().in_units(); }
  Eigen::Index output_size() const { return layers.empty() ? 0 : layers.back().out_units(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.parameter_count();
    return n;
  }

  /// Narrowest layer output: the compressed feature vector of an autoencoder.
  Eigen::Index bottleneck_width() const {
    Eigen::Index w = input_size();
    for (const auto& l : layers) w = std::min(w, l.out_units());
    return w;
  }

  bool all_finite() const {
    return std::all_of(layers.begin(), layers.end(), [](const DenseLayer<Scalar>& l) {
      return l.weights.allFinite() && l.biases.allFinite();
    });
  }
};

/// Same shapes as a network's parameters.
template <typename Scalar>
struct Gradients {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;
  Scalar loss = 0;
};

struct TrainConfig {
  int batch_size = 128;
  int epochs = 100;
  double learning_rate = 0.001;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  /// Fraction of the training rows held out to select the best epoch.
  double cv_fraction = 0.1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0;
  double cv_loss = 0;
};

template <typename Scalar>
struct FitResult {
  Network<Scalar> network;
  std::vector<EpochRecord> history;
  /// Zero-based epoch whose parameters were kept.
  int best_epoch = 0;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Construction ---------------------------------------------------------------

/// Glorot-uniform weights, zero biases. `widths` lists every layer boundary,
/// input first; `activations` has one entry per layer.
template <typename Scalar>
Network<Scalar> make_network(std::span<const int> widths, std::span<const Activation> activations,
                             std::uint64_t seed) {
  if (widths.size() < 2) throw Error("make_network: need at least an input and an output width");
  if (activations.size() != widths.size() - 1) throw Error("make_network: one activation per layer required");
  std::mt19937_64 rng(seed);
  Network<Scalar> net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i];
    const int out = widths[i + 1];
    if (in < 1 || out < 1) throw Error("make_network: layer widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer<Scalar> layer;
    layer.weights.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = static_cast<Scalar>(dist(rng));
    layer.biases = VectorX<Scalar>::Zero(out);
    layer.activation = activations[i];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

/// Symmetric autoencoder: `encoder_widths` runs from the input down to the
/// bottleneck and the decoder mirrors it. Hidden layers use ReLU, the output
/// layer Sigmoid. {5, 4, 3} gives 5-4-3-4-5.
template <typename Scalar = double>
Network<Scalar> build_autoencoder(std::span<const int> encoder_widths, std::uint64_t seed) {
  if (encoder_widths.size() < 2) throw Error("build_autoencoder: need input and bottleneck widths");
  std::vector<int> widths(encoder_widths.begin(), encoder_widths.end());
  for (auto it = encoder_widths.rbegin() + 1; it != encoder_widths.rend(); ++it) widths.push_back(*it);
  std::vector<Activation> acts(widths.size() - 1, Activation::relu);
  acts.back() = Activation::sigmoid;
  return make_network<Scalar>(widths, acts, seed);
}

/// Deep autoencoder: input -> 128 -> 64 -> 32 -> 16 -> 8 and mirrored back.
template <typename Scalar = double>
Network<Scalar> build_dae(int input_size = kPackedWidth, std::uint64_t seed = 0) {
  if (input_size < 1) throw Error("build_dae: input size must be positive");
  const int widths[] = {input_size, 128, 64, 32, 16, 8};
  return build_autoencoder<Scalar>(widths, seed);
}

/// Vanilla autoencoder: input -> hidden -> input.
template <typename Scalar = double>
Network<Scalar> build_vae(int input_size = kPackedWidth, int hidden = 8, std::uint64_t seed = 0) {
  if (input_size < 1 || hidden < 1) throw Error("build_vae: widths must be positive");
  const int widths[] = {input_size, hidden};
  return build_autoencoder<Scalar>(widths, seed);
}

// Forward / backward ---------------------------------------------------------

namespace detail {

template <typename Derived>
void apply_activation(Eigen::MatrixBase<Derived>& z, Activation activation) {
  using Scalar = typename Derived::Scalar;
  switch (activation) {
    case Activation::relu:
      z = z.cwiseMax(Scalar(0));
      break;
    case Activation::sigmoid:
      z = (Scalar(1) + (-z.array()).exp()).inverse().matrix();
      break;
    case Activation::identity:
      break;
  }
}

template <typename Scalar>
void check_input(const Network<Scalar>& net, Eigen::Index cols, const char* who) {
  if (net.layers.empty()) throw Error(std::string(who) + ": network has no layers");
  if (cols != net.input_size()) {
    throw Error(std::string(who) + ": batch has " + std::to_string(cols) + " features, network expects " +
                std::to_string(net.input_size()));
  }
}

/// Post-activation outputs of every layer, input first.
template <typename Scalar>
std::vector<MatrixX<Scalar>> forward_trace(const Network<Scalar>& net, const MatrixX<Scalar>& batch) {
  std::vector<MatrixX<Scalar>> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(batch);
  for (const auto& layer : net.layers) {
    MatrixX<Scalar> z(acts.back().rows(), layer.out_units());
    z.noalias() = acts.back() * layer.weights.transpose();
    z.rowwise() += layer.biases.transpose();
    apply_activation(z, layer.activation);
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace detail

template <typename Scalar>
MatrixX<Scalar> forward(const Network<Scalar>& net, const MatrixX<Scalar>& batch) {
  detail::check_input(net, batch.cols(), "forward");
  MatrixX<Scalar> a = batch;
  for (const auto& layer : net.layers) {
    MatrixX<Scalar> z(a.rows(), layer.out_units());
    z.noalias() = a * layer.weights.transpose();
    z.rowwise() += layer.biases.transpose();
    detail::apply_activation(z, layer.activation);
    a = std::move(z);
  }
  return a;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse(const Eigen::MatrixBase<DerivedA>& z, const Eigen::MatrixBase<DerivedB>& z_hat) {
  if (z.size() != z_hat.size()) throw Error("mse: length mismatch");
  if (z.size() == 0) throw Error("mse: empty input");
  return (z.derived().reshaped() - z_hat.derived().reshaped()).squaredNorm() /
         static_cast<typename DerivedA::Scalar>(z.size());
}

/// Per-row reconstruction MSE of an autoencoder.
template <typename Scalar>
VectorX<Scalar> reconstruction_errors(const Network<Scalar>& net, const MatrixX<Scalar>& batch) {
  const MatrixX<Scalar> recon = forward(net, batch);
  if (recon.cols() != batch.cols()) throw Error("reconstruction_errors: network is not an autoencoder");
  return (recon - batch).rowwise().squaredNorm() / static_cast<Scalar>(batch.cols());
}

/// Gradient of mean(MSE(row, target_row)) over the batch with respect to every
/// parameter. ReLU uses subgradient 0 at 0.
template <typename Scalar>
Gradients<Scalar> backward(const Network<Scalar>& net, const MatrixX<Scalar>& batch,
                           const MatrixX<Scalar>& targets) {
  detail::check_input(net, batch.cols(), "backward");
  if (targets.rows() != batch.rows() || targets.cols() != net.output_size()) {
    throw Error("backward: target shape does not match the network output");
  }
  if (batch.rows() == 0) throw Error("backward: empty batch");

  const auto acts = detail::forward_trace(net, batch);
  const auto L = net.layers.size();
  Gradients<Scalar> g;
  g.weights.resize(L);
  g.biases.resize(L);

  MatrixX<Scalar> diff = acts.back() - targets;
  const Scalar denom = static_cast<Scalar>(targets.size());
  g.loss = diff.squaredNorm() / denom;

  MatrixX<Scalar> delta = (Scalar(2) / denom) * diff;  // dLoss/dOutput
  for (std::size_t k = L; k-- > 0;) {
    const auto& layer = net.layers[k];
    const auto& out = acts[k + 1];
    switch (layer.activation) {
      case Activation::relu:
        delta = (out.array() > Scalar(0)).select(delta, Scalar(0));
        break;
      case Activation::sigmoid:
        delta.array() *= out.array() * (Scalar(1) - out.array());
        break;
      case Activation::identity:
        break;
    }
    g.weights[k].noalias() = delta.transpose() * acts[k];
    g.biases[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      MatrixX<Scalar> prev(delta.rows(), layer.in_units());
      prev.noalias() = delta * layer.weights;
      delta = std::move(prev);
    }
  }
  return g;
}

/// Autoencoder form: the batch is its own target.
template <typename Scalar>
Gradients<Scalar> backward(const Network<Scalar>& net, const MatrixX<Scalar>& batch) {
  return backward(net, batch, batch);
}

// Training -------------------------------------------------------------------

template <typename Scalar>
struct RmsPropState {
  std::vector<MatrixX<Scalar>> weight_acc;
  std::vector<VectorX<Scalar>> bias_acc;

  explicit RmsPropState(const Network<Scalar>& net) {
    for (const auto& l : net.layers) {
      weight_acc.push_back(MatrixX<Scalar>::Zero(l.weights.rows(), l.weights.cols()));
      bias_acc.push_back(VectorX<Scalar>::Zero(l.biases.size()));
    }
  }

  /// acc <- rho*acc + (1-rho)*g^2;  theta <- theta - lr*g/sqrt(acc + eps)
  void step(Network<Scalar>& net, const Gradients<Scalar>& g, const TrainConfig& cfg) {
    const auto rho = static_cast<Scalar>(cfg.rmsprop_decay);
    const auto lr = static_cast<Scalar>(cfg.learning_rate);
    const auto eps = static_cast<Scalar>(cfg.rmsprop_epsilon);
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      auto wa = weight_acc[k].array();
      wa = rho * wa + (Scalar(1) - rho) * g.weights[k].array().square();
      net.layers[k].weights.array() -= lr * g.weights[k].array() / (wa + eps).sqrt();
      auto ba = bias_acc[k].array();
      ba = rho * ba + (Scalar(1) - rho) * g.biases[k].array().square();
      net.layers[k].biases.array() -= lr * g.biases[k].array() / (ba + eps).sqrt();
    }
  }
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> gather_rows(const MatrixX<Scalar>& m, std::span<const Eigen::Index> rows) {
  MatrixX<Scalar> out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

template <typename Scalar>
double mean_loss(const Network<Scalar>& net, const MatrixX<Scalar>& data) {
  return static_cast<double>(reconstruction_errors(net, data).mean());
}

}  // namespace detail

/// Trains an autoencoder on `train` (rows in [0,1]). A seeded cv_fraction of
/// the rows is held out; every epoch shuffles the remaining rows into
/// mini-batches and applies RMSProp. The parameters of the epoch with the
/// lowest held-out loss are returned.
template <typename Scalar>
FitResult<Scalar> fit(Network<Scalar> net, const MatrixX<Scalar>& train, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_input(net, train.cols(), "fit");
  const Eigen::Index n = train.rows();
  if (n < 2) throw Error("fit: need at least 2 training rows");

  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  auto cv_rows = static_cast<Eigen::Index>(std::llround(cfg.cv_fraction * static_cast<double>(n)));
  cv_rows = std::clamp<Eigen::Index>(cv_rows, 1, n - 1);
  const auto split = order.begin() + (n - cv_rows);
  const MatrixX<Scalar> cv = detail::gather_rows<Scalar>(train, {split, order.end()});
  const MatrixX<Scalar> tr = detail::gather_rows<Scalar>(train, {order.begin(), split});

  std::vector<Eigen::Index> batch_order(static_cast<std::size_t>(tr.rows()));
  std::iota(batch_order.begin(), batch_order.end(), Eigen::Index{0});

  RmsPropState<Scalar> opt(net);
  FitResult<Scalar> result;
  result.network = net;
  double best_cv = std::numeric_limits<double>::infinity();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    for (std::size_t start = 0; start < batch_order.size(); start += batch) {
      const auto count = std::min(batch, batch_order.size() - start);
      const auto xb = detail::gather_rows<Scalar>(tr, std::span(batch_order).subspan(start, count));
      const auto g = backward(net, xb);
      if (!std::isfinite(static_cast<double>(g.loss))) {
        throw TrainingError("fit: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at row " +
                            std::to_string(start) + "; lower the learning rate or check the input scaling");
      }
      opt.step(net, g, cfg);
    }
    EpochRecord rec{detail::mean_loss(net, tr), detail::mean_loss(net, cv)};
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.cv_loss)) {
      throw TrainingError("fit: non-finite loss after epoch " + std::to_string(epoch + 1));
    }
    result.history.push_back(rec);
    if (rec.cv_loss < best_cv) {
      best_cv = rec.cv_loss;
      result.best_epoch = epoch;
      result.network = net;
    }
  }
  return result;
}

}  // namespace trajnorm
