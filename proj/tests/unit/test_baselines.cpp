#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trajnorm/baselines.hpp"

using namespace trajnorm;

namespace {

Eigen::MatrixXd gaussian_cloud(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sigma = 1.0) {
  std::normal_distribution<double> g(0, sigma);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST(PathLength, SmallValues) {
  EXPECT_EQ(average_path_length(0), 0.0);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_EQ(average_path_length(2), 1.0);
  EXPECT_NEAR(average_path_length(3), 2 * 1.5 - 4.0 / 3.0, 1e-15);
  EXPECT_EQ(harmonic_number(0), 0.0);
  EXPECT_EQ(harmonic_number(1), 1.0);
}

TEST(PathLength, MatchesBruteForceSums) {
  for (std::int64_t n = 0; n <= 10000; ++n) {
    ASSERT_NEAR(average_path_length(n), trajnorm::testing::reference_path_length(n), 1e-12) << n;
  }
}

TEST(Forest, DefaultConfiguration) {
  const IsolationForestConfig cfg;
  EXPECT_EQ(cfg.tree_count, 100);
  EXPECT_EQ(cfg.subsample_size, 256);
  EXPECT_EQ(cfg.contamination, 0.1);
  std::mt19937_64 rng(1);
  const auto model = if_fit(gaussian_cloud(rng, 300, 3), cfg, 5);
  EXPECT_EQ(model.trees.size(), 100u);
  EXPECT_EQ(model.subsample_size, 256);
  EXPECT_EQ(model.depth_limit(), 8);
}

TEST(Forest, InvalidConfigurationsAndDataThrow) {
  IsolationForestConfig cfg;
  cfg.contamination = 0.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.tree_count = 0;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(if_fit(Eigen::MatrixXd::Constant(10, 3, 2.0), {}, 1), Error);
}

TEST(Forest, TwoPointsGiveOneSplitPerTree) {
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1, 5;
  const auto model = if_fit(two, {}, 3);
  for (const auto& t : model.trees) {
    EXPECT_EQ(t.split_count(), 1);
    ASSERT_EQ(t.nodes.size(), 3u);
    EXPECT_EQ(t.nodes[1].size, 1);
    EXPECT_EQ(t.nodes[2].size, 1);
  }
}

TEST(Forest, StructureInvariants) {
  std::mt19937_64 rng(2);
  const auto data = gaussian_cloud(rng, 500, 4);
  const auto model = if_fit(data, {}, 7);
  for (const auto& t : model.trees) {
    EXPECT_LE(t.depth(), model.depth_limit());
    int leaf_total = 0;
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) leaf_total += n.size;
      else {
        EXPECT_GE(n.feature, 0);
        EXPECT_LT(n.feature, 4);
      }
    }
    EXPECT_EQ(leaf_total, 256);
  }
  for (Eigen::Index r = 0; r < 50; ++r) {
    for (const auto& t : model.trees) {
      const double h = t.path_length(data.row(r));
      EXPECT_GE(h, 1.0);
      EXPECT_LE(h, model.depth_limit() + average_path_length(256));
    }
    const double s = if_score(model, data.row(r));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(Forest, SplitsSeparateEveryNode) {
  // Every internal node has two non-empty children: leaf sizes under each
  // side sum to at least one.
  std::mt19937_64 rng(3);
  const auto model = if_fit(gaussian_cloud(rng, 100, 2), {}, 9);
  for (const auto& t : model.trees) {
    std::vector<int> subtree(t.nodes.size(), 0);
    for (std::size_t i = t.nodes.size(); i-- > 0;) {
      const auto& n = t.nodes[i];
      subtree[i] = n.is_leaf() ? n.size
                               : subtree[static_cast<std::size_t>(n.left)] + subtree[static_cast<std::size_t>(n.right)];
    }
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      EXPECT_GT(subtree[static_cast<std::size_t>(n.left)], 0);
      EXPECT_GT(subtree[static_cast<std::size_t>(n.right)], 0);
    }
  }
}

TEST(Forest, DeterministicForFixedSeed) {
  std::mt19937_64 rng(4);
  const auto data = gaussian_cloud(rng, 400, 3);
  EXPECT_EQ(format_forest(if_fit(data, {}, 12)), format_forest(if_fit(data, {}, 12)));
  EXPECT_NE(format_forest(if_fit(data, {}, 12)), format_forest(if_fit(data, {}, 13)));
}

TEST(Forest, ContaminationSetsTrainingAbnormalShare) {
  std::mt19937_64 rng(5);
  const auto data = gaussian_cloud(rng, 1000, 3);
  const auto model = if_fit(data, {}, 1);
  const auto det = if_detect_batch(model, data);
  const double share = static_cast<double>(det.abnormal_count()) / 1000.0;
  EXPECT_NEAR(share, 0.10, 0.02);
}

TEST(Forest, PlantedOutlierScoresHighest) {
  std::mt19937_64 rng(6);
  auto data = gaussian_cloud(rng, 500, 2);
  data.row(17) << 25, -25;
  const auto model = if_fit(data, {}, 2);
  const auto s = if_score_batch(model, data);
  Eigen::Index best = 0;
  s.maxCoeff(&best);
  EXPECT_EQ(best, 17);
  EXPECT_EQ(if_classify(model, data.row(17)), Decision::abnormal);
}

TEST(Forest, BoundaryAndMonotoneClassification) {
  EXPECT_EQ(if_classify_score(0.6, 0.6), Decision::normal);
  EXPECT_EQ(if_classify_score(std::nextafter(0.6, 1.0), 0.6), Decision::abnormal);
  EXPECT_EQ(if_classify_score(0.9, 0.6), Decision::abnormal);
}

TEST(Forest, PersistenceIsBitExact) {
  std::mt19937_64 rng(7);
  const auto data = gaussian_cloud(rng, 300, 5);
  const auto model = if_fit(data, {}, 4);
  const auto back = parse_forest(format_forest(model));
  EXPECT_TRUE(if_score_batch(back, data) == if_score_batch(model, data));
  EXPECT_EQ(back.score_threshold, model.score_threshold);
  EXPECT_EQ(format_forest(back), format_forest(model));
  std::string bad = format_forest(model);
  bad.replace(0, 8, "TRAJNORX");
  EXPECT_THROW(parse_forest(bad), Error);
  const auto text = format_forest(model);
  EXPECT_THROW(parse_forest(text.substr(0, text.size() - 20)), Error);
  EXPECT_THROW(if_score(model, Eigen::RowVectorXd::Zero(4)), Error);
}

TEST(VanillaAutoencoder, TwoLayerDetector) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 100);
  Corpus normal(50, kPackedWidth);
  for (Eigen::Index i = 0; i < normal.size(); ++i) normal.data()[i] = u(rng);
  normal.col(0).setZero();
  DetectorTrainConfig cfg;
  cfg.train.epochs = 2;
  const auto t = vae_detector(normal, cfg, 8);
  EXPECT_EQ(t.model.network.layers.size(), 2u);
  EXPECT_EQ(t.model.network.bottleneck_width(), 8);
  EXPECT_EQ(t.model.threshold, compute_threshold(t.train_scores, t.validation_scores));
  EXPECT_EQ(t.model.metadata.at("method"), "vae");
}
