#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trajnorm/neural.hpp"

using namespace trajnorm;
using trajnorm::testing::gradient_check;
using trajnorm::testing::loop_forward;
using trajnorm::testing::random_small_network;

namespace {

Eigen::MatrixXd uniform_batch(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST(Build, DeepAutoencoderShape) {
  const auto net = build_dae(125, 1);
  ASSERT_EQ(net.layers.size(), 10u);
  const int widths[] = {125, 128, 64, 32, 16, 8, 16, 32, 64, 128, 125};
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(net.layers[k].in_units(), widths[k]);
    EXPECT_EQ(net.layers[k].out_units(), widths[k + 1]);
    EXPECT_EQ(net.layers[k].activation, k == 9 ? Activation::sigmoid : Activation::relu);
    EXPECT_TRUE(net.layers[k].biases.isZero());
  }
  EXPECT_EQ(net.bottleneck_width(), 8);
  Eigen::Index by_hand = 0;
  for (std::size_t k = 0; k < 10; ++k) by_hand += widths[k] * widths[k + 1] + widths[k + 1];
  EXPECT_EQ(net.parameter_count(), by_hand);
  EXPECT_EQ(net.parameter_count(), 54373);
}

TEST(Build, VanillaAutoencoderShape) {
  const auto net = build_vae(125, 8, 1);
  ASSERT_EQ(net.layers.size(), 2u);
  EXPECT_EQ(net.parameter_count(), 2133);
  EXPECT_EQ(net.layers[0].activation, Activation::relu);
  EXPECT_EQ(net.layers[1].activation, Activation::sigmoid);
}

TEST(Build, MirroredSmallAutoencoder) {
  const int enc[] = {5, 4, 3};
  const auto net = build_autoencoder(enc, 3);
  ASSERT_EQ(net.layers.size(), 4u);
  const int widths[] = {5, 4, 3, 4, 5};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(net.layers[k].in_units(), widths[k]);
    EXPECT_EQ(net.layers[k].out_units(), widths[k + 1]);
  }
}

TEST(Build, GlorotRangeAndSeeding) {
  const auto net = build_dae(125, 9);
  for (const auto& l : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in_units() + l.out_units()));
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), limit);
  }
  EXPECT_TRUE(build_dae(125, 9).layers[3].weights == net.layers[3].weights);
  EXPECT_FALSE(build_dae(125, 10).layers[3].weights == net.layers[3].weights);
}

TEST(Forward, ZeroParametersGiveOneHalf) {
  auto net = build_dae(125, 1);
  for (auto& l : net.layers) l.weights.setZero();
  std::mt19937_64 rng(1);
  const auto out = forward(net, uniform_batch(rng, 4, 125));
  EXPECT_TRUE((out.array() == 0.5).all());
}

TEST(Forward, MatchesLoopImplementation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int enc[] = {5, 4};
    auto net = build_autoencoder(enc, rng());
    net.layers[0].biases.setRandom();
    const auto x = uniform_batch(rng, 7, 5);
    EXPECT_LE((forward(net, x) - loop_forward(net, x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, OutputsStrictlyInsideUnitInterval) {
  std::mt19937_64 rng(3);
  const auto net = build_dae(125, 4);
  const auto out = forward(net, uniform_batch(rng, 32, 125));
  EXPECT_GT(out.minCoeff(), 0.0);
  EXPECT_LT(out.maxCoeff(), 1.0);
}

TEST(Forward, DimensionMismatchThrows) {
  const auto net = build_vae(10, 3, 1);
  const Eigen::MatrixXd narrow = Eigen::MatrixXd::Zero(2, 9);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 10);
  const Eigen::MatrixXd wrong_rows = Eigen::MatrixXd::Zero(3, 10);
  EXPECT_THROW(forward(net, narrow), Error);
  EXPECT_THROW(backward(net, narrow), Error);
  EXPECT_THROW(backward(net, x, wrong_rows), Error);
}

TEST(Mse, Examples) {
  Eigen::VectorXd z(3), zh(3);
  z << 0.2, 0.4, 0.6;
  zh << 0.1, 0.4, 0.9;
  EXPECT_NEAR(mse(z, zh), (0.01 + 0 + 0.09) / 3, 1e-15);
  EXPECT_EQ(mse(z, z), 0.0);
  EXPECT_EQ(mse(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), 1.0);
  const Eigen::VectorXd two = Eigen::VectorXd::Zero(2), three = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(mse(two, three), Error);
}

TEST(Backward, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = random_small_network(rng, 2 + trial % 3, true);
    const auto x = uniform_batch(rng, 6, net.input_size());
    EXPECT_LT(gradient_check(net, x, x), 1e-4) << "trial " << trial;
  }
}

TEST(Backward, ZeroAtExactReconstruction) {
  auto net = build_vae(4, 3, 1);
  for (auto& l : net.layers) l.weights.setZero();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 4, 0.5);
  const auto g = backward(net, x);
  EXPECT_EQ(g.loss, 0.0);
  for (const auto& w : g.weights) EXPECT_TRUE(w.isZero(0));
  for (const auto& b : g.biases) EXPECT_TRUE(b.isZero(0));
}

TEST(Backward, BatchGradientIsMeanOfPerSampleGradients) {
  std::mt19937_64 rng(6);
  const auto net = random_small_network(rng, 3, true);
  const auto x = uniform_batch(rng, 5, net.input_size());
  const auto g = backward(net, x);
  double loss = 0;
  std::vector<Eigen::MatrixXd> acc;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::MatrixXd row = x.row(r);
    const auto gr = backward(net, row);
    loss += gr.loss / 5;
    if (acc.empty()) acc.assign(gr.weights.begin(), gr.weights.end());
    else
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += gr.weights[k];
  }
  EXPECT_NEAR(g.loss, loss, 1e-12);
  for (std::size_t k = 0; k < acc.size(); ++k) {
    EXPECT_LE((g.weights[k] - acc[k] / 5).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Backward, DuplicatedBatchLeavesGradientUnchanged) {
  std::mt19937_64 rng(7);
  const auto net = random_small_network(rng, 2, true);
  const auto x = uniform_batch(rng, 4, net.input_size());
  Eigen::MatrixXd twice(8, x.cols());
  twice << x, x;
  const auto a = backward(net, x);
  const auto b = backward(net, twice);
  EXPECT_NEAR(a.loss, b.loss, 1e-15);
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    EXPECT_LE((a.weights[k] - b.weights[k]).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(RmsProp, SingleStepMatchesHandComputation) {
  auto net = build_vae(2, 1, 1);
  const auto before = net;
  Gradients<double> g;
  for (const auto& l : net.layers) {
    g.weights.push_back(Eigen::MatrixXd::Constant(l.weights.rows(), l.weights.cols(), 0.5));
    g.biases.push_back(Eigen::VectorXd::Constant(l.biases.size(), -2.0));
  }
  TrainConfig cfg;
  RmsPropState<double> opt(net);
  opt.step(net, g, cfg);
  const double acc_w = 0.1 * 0.25;
  const double acc_b = 0.1 * 4.0;
  EXPECT_NEAR(net.layers[0].weights(0, 0), before.layers[0].weights(0, 0) - 0.001 * 0.5 / std::sqrt(acc_w + 1e-8),
              1e-15);
  EXPECT_NEAR(net.layers[1].biases(0), 0.001 * 2.0 / std::sqrt(acc_b + 1e-8), 1e-15);
  EXPECT_GE(opt.weight_acc[0].minCoeff(), 0.0);
}

TEST(Fit, DefaultsFollowTheTrainingTable) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.batch_size, 128);
  EXPECT_EQ(cfg.epochs, 100);
  EXPECT_EQ(cfg.learning_rate, 0.001);
  EXPECT_NO_THROW(cfg.validate());
  TrainConfig bad;
  bad.cv_fraction = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.learning_rate = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Fit, MemorizesOneRepeatedSample) {
  std::mt19937_64 rng(8);
  const Eigen::RowVectorXd sample = uniform_batch(rng, 1, 20).row(0) * 0.8 + Eigen::RowVectorXd::Constant(20, 0.1);
  const Eigen::MatrixXd train = sample.replicate(500, 1);
  const int enc[] = {20, 8, 4};
  TrainConfig cfg;
  cfg.rng_seed = 1;
  const auto res = fit(build_autoencoder(enc, 2), train, cfg);
  ASSERT_EQ(res.history.size(), 100u);
  EXPECT_LT(res.history.back().train_loss, 1e-4);
  EXPECT_LT(res.history.back().train_loss, res.history.front().train_loss);
}

TEST(Fit, DeterministicForFixedSeed) {
  std::mt19937_64 rng(9);
  const auto train = uniform_batch(rng, 300, 10);
  const int enc[] = {10, 6, 3};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.rng_seed = 33;
  const auto a = fit(build_autoencoder(enc, 1), train, cfg);
  const auto b = fit(build_autoencoder(enc, 1), train, cfg);
  ASSERT_EQ(a.network.layers.size(), b.network.layers.size());
  for (std::size_t k = 0; k < a.network.layers.size(); ++k) {
    EXPECT_TRUE(a.network.layers[k].weights == b.network.layers[k].weights);
    EXPECT_TRUE(a.network.layers[k].biases == b.network.layers[k].biases);
  }
  EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(Fit, KeepsTheEpochWithLowestCvLoss) {
  std::mt19937_64 rng(10);
  const auto train = uniform_batch(rng, 200, 6);
  const int enc[] = {6, 3};
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.learning_rate = 0.01;
  const auto res = fit(build_autoencoder(enc, 1), train, cfg);
  for (const auto& rec : res.history) {
    EXPECT_GE(rec.cv_loss, res.history[static_cast<std::size_t>(res.best_epoch)].cv_loss);
  }
}

TEST(Fit, NonFiniteInputIsReported) {
  Eigen::MatrixXd train = Eigen::MatrixXd::Constant(20, 4, 0.5);
  train(3, 2) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 20;
  EXPECT_THROW(fit(build_vae(4, 2, 1), train, cfg), TrainingError);
}
