#pragma once

// Comparison detectors: an isolation forest and the single-hidden-layer
// (vanilla) autoencoder detector.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "trajnorm/common.hpp"
#include "trajnorm/detector.hpp"

namespace trajnorm {

/// Harmonic number H(m) = sum_{i=1..m} 1/i; H(0) = 0.
double harmonic_number(std::int64_t m);

/// Average unsuccessful-search path length in a binary search tree of n
/// points: c(n) = 2 H(n-1) - 2 (n-1) / n, with c(0) = c(1) = 0.
double average_path_length(std::int64_t n);

struct IsolationNode {
  /// -1 marks a leaf.
  int feature = -1;
  double split = 0;
  int left = -1;
  int right = -1;
  /// Training points that reached this leaf.
  int size = 0;

  bool is_leaf() const { return feature < 0; }
};

/// Nodes in pre-order, root first. Points with x[feature] < split go left.
struct IsolationTree {
  std::vector<IsolationNode> nodes;

  /// Edges from the root to the leaf reached by `x`, plus c(leaf size).
  double path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
  int split_count() const;
};

struct IsolationForestConfig {
  int tree_count = 100;
  int subsample_size = 256;
  double contamination = 0.1;

  void validate() const;
};

struct IsolationForestModel {
  std::vector<IsolationTree> trees;
  /// min(configured subsample size, training rows); normalizes path lengths.
  int subsample_size = 0;
  int features = 0;
  double contamination = 0.1;
  /// Scores strictly above this are Abnormal.
  double score_threshold = 0;
  std::map<std::string, std::string> metadata;

  int depth_limit() const;
  void validate() const;
};

/// Builds the forest on seeded subsamples, then sets the threshold so that a
/// `contamination` share of the training rows scores above it.
IsolationForestModel if_fit(const Eigen::MatrixXd& samples, const IsolationForestConfig& cfg,
                            std::uint64_t rng_seed);

/// 2^(-E[h(x)] / c(subsample_size)); higher is more anomalous.
double if_score(const IsolationForestModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& sample);
Eigen::VectorXd if_score_batch(const IsolationForestModel& model, const Eigen::MatrixXd& samples);

inline Decision if_classify_score(double score, double threshold) {
  return score > threshold ? Decision::abnormal : Decision::normal;
}
Decision if_classify(const IsolationForestModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& sample);
Detections if_detect_batch(const IsolationForestModel& model, const Eigen::MatrixXd& samples);

inline constexpr std::string_view kForestMagic = "TRAJNORM-IFOREST";
inline constexpr int kForestVersion = 1;

std::string format_forest(const IsolationForestModel& model);
IsolationForestModel parse_forest(std::string_view text);
void save_forest(const IsolationForestModel& model, const std::filesystem::path& path);
IsolationForestModel load_forest(const std::filesystem::path& path);

/// Vanilla autoencoder detector (input -> hidden -> input) trained and
/// thresholded exactly like train_detector.
DetectorTraining vae_detector(const Corpus& normal, const DetectorTrainConfig& cfg, int hidden = 8);

}  // namespace trajnorm
