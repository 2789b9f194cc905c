#pragma once

// Reconstruction-error anomaly detector: min-max scaling, per-sample MSE
// scores, the mean + 3*STD threshold and the Normal/Abnormal rule, plus the
// versioned model file.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "trajnorm/common.hpp"
#include "trajnorm/neural.hpp"

namespace trajnorm {

struct MinMaxScaler {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;

  Eigen::Index features() const { return min.size(); }
  bool fitted() const { return min.size() > 0 && min.size() == max.size(); }
};

/// Column-wise min and max; a constant column gets max = min + 1.
MinMaxScaler fit_scaler(const Eigen::MatrixXd& samples);
/// (v - min) / (max - min), clamped to [0, 1].
Eigen::MatrixXd transform(const MinMaxScaler& scaler, const Eigen::MatrixXd& samples);
Eigen::MatrixXd inverse_transform(const MinMaxScaler& scaler, const Eigen::MatrixXd& scaled);

enum class ScoreRole { train, validation, test };

struct ScoreSet {
  Eigen::VectorXd scores;
  ScoreRole role = ScoreRole::test;

  Eigen::Index size() const { return scores.size(); }
};

enum class Decision { normal, abnormal };

std::string_view decision_name(Decision decision);

struct DetectorModel {
  Network<double> network;
  MinMaxScaler scaler;
  double threshold = 0;
  /// Free-form provenance (method, seed, config digest, ...). Keys and values
  /// must not contain whitespace.
  std::map<std::string, std::string> metadata;

  /// Throws if the network, scaler and threshold are inconsistent.
  void validate() const;
};

/// Reconstruction MSE per row of already-scaled samples.
ScoreSet score(const Network<double>& network, const Eigen::MatrixXd& scaled,
               ScoreRole role = ScoreRole::test);
ScoreSet score(const DetectorModel& model, const Eigen::MatrixXd& scaled,
               ScoreRole role = ScoreRole::test);

/// tau = mean(S_tr) + mean(S_va) + 3 * (STD(S_tr) + STD(S_va)), population STD.
double compute_threshold(const ScoreSet& train, const ScoreSet& validation);

/// Normal iff score <= threshold.
inline Decision classify_score(double score, double threshold) {
  return score <= threshold ? Decision::normal : Decision::abnormal;
}

struct Detections {
  Eigen::VectorXd scores;
  std::vector<Decision> decisions;
  double threshold = 0;

  std::size_t abnormal_count() const;
};

/// Scales raw packed samples with the model's stored scaler, scores and thresholds them.
Detections detect_batch(const DetectorModel& model, const Corpus& raw);
Decision classify(const DetectorModel& model, const PackedSample& raw);

struct DetectorTrainConfig {
  /// Share of the shuffled normal samples used for training; the rest
  /// forms the external validation set.
  double split_fraction = 0.8;
  TrainConfig train;
  /// Master seed; shuffling, weight init and mini-batch order derive from it.
  std::uint64_t seed = 0;

  void validate() const;
};

struct DetectorTraining {
  DetectorModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  ScoreSet train_scores;
  ScoreSet validation_scores;
  /// Indices into the input corpus.
  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> validation_rows;
};

using NetworkFactory = std::function<Network<double>(int input_size, std::uint64_t seed)>;

/// Shuffle, split, build, scale on the training part, fit, score both parts
/// and set the threshold.
DetectorTraining train_autoencoder_detector(const Corpus& normal, const NetworkFactory& make_net,
                                            const DetectorTrainConfig& cfg, const std::string& method);

/// Deep autoencoder detector.
DetectorTraining train_detector(const Corpus& normal, const DetectorTrainConfig& cfg);

/// Seeded shuffle of [0, n) split at round(fraction * n); both parts non-empty.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> shuffled_split(Eigen::Index n, double fraction,
                                                                               std::uint64_t seed);
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows);

inline constexpr std::string_view kModelMagic = "TRAJNORM-MODEL";
inline constexpr int kModelVersion = 1;

std::string format_model(const DetectorModel& model);
DetectorModel parse_model(std::string_view text);
void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

/// Sequential reader over whitespace-separated tokens with line tracking,
/// shared by the model file parsers.
class TokenReader {
 public:
  TokenReader(std::string_view text, std::string source);

  bool done() const;
  std::string_view next(const char* expecting);
  void expect(std::string_view keyword);
  double real(const char* expecting);
  long long integer(const char* expecting);
  std::size_t line() const { return line_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  void skip_space();

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace trajnorm
