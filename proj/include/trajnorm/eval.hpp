#pragma once

// Repeated random sub-sampling validation and the TPR/FPR comparison report.
//
// Rate convention (positive class = abnormal):
//   normal row:   TPR = normals classified Normal / normals
//                 FPR = abnormals classified Normal / abnormals
//   abnormal row: TPR = abnormals classified Abnormal / abnormals
//                 FPR = normals classified Abnormal / normals

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trajnorm/baselines.hpp"
#include "trajnorm/detector.hpp"

namespace trajnorm {

enum class Method { dae, vae, iforest };

/// "DAE", "VAE", "IF".
std::string_view method_label(Method method);
/// Accepts "dae", "vae", "if".
Method parse_method(std::string_view name);
std::string_view method_key(Method method);

enum class Status { normal, abnormal };
std::string_view status_name(Status status);

struct ConfusionCounts {
  std::size_t tp = 0;  // abnormal -> Abnormal
  std::size_t tn = 0;  // normal -> Normal
  std::size_t fp = 0;  // normal -> Abnormal
  std::size_t fn = 0;  // abnormal -> Normal

  std::size_t normals() const { return tn + fp; }
  std::size_t abnormals() const { return tp + fn; }
  std::size_t total() const { return tp + tn + fp + fn; }
  /// Model-selection objective.
  long long selection_score() const {
    return static_cast<long long>(tp + tn) - static_cast<long long>(fp + fn);
  }
};

ConfusionCounts count_decisions(const std::vector<Decision>& on_normals, const std::vector<Decision>& on_abnormals);

struct RunMetrics {
  Method method = Method::dae;
  std::string dataset;
  Status status = Status::normal;
  std::size_t size = 0;
  double tpr = 0;  // percent
  double fpr = 0;  // percent
  int iteration = 0;
  std::uint64_t seed = 0;
};

/// The normal and abnormal rows for one run.
std::vector<RunMetrics> rows_from_counts(const ConfusionCounts& counts, Method method, const std::string& dataset,
                                         int iteration, std::uint64_t seed);

struct EvalSettings {
  std::string dataset = "synthetic";
  DetectorTrainConfig detector;
  int vae_hidden = 8;
  IsolationForestConfig iforest;
};

using TrainedModel = std::variant<DetectorModel, IsolationForestModel>;

struct EvalRun {
  int iteration = 0;
  std::uint64_t seed = 0;
  ConfusionCounts counts;
  std::vector<RunMetrics> rows;
  TrainedModel model;
};

/// Trains `method` on the normal corpus and classifies the held-out normal
/// validation rows and every abnormal row.
EvalRun evaluate_once(Method method, const Corpus& normal, const Corpus& abnormal, std::uint64_t seed,
                      const EvalSettings& settings, int iteration = 0);

struct AggregateRow {
  Method method = Method::dae;
  std::string dataset;
  Status status = Status::normal;
  std::size_t size = 0;
  std::size_t runs = 0;
  double tpr_mean = 0, tpr_std = 0, tpr_min = 0, tpr_max = 0;
  double fpr_mean = 0, fpr_std = 0, fpr_min = 0, fpr_max = 0;
};

/// Groups rows by (method, dataset, status); mean and population STD over runs.
/// Independent of the order of `rows`.
std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows);

struct RepeatedEval {
  std::vector<EvalRun> runs;
  std::vector<AggregateRow> summary;
  std::size_t best_run = 0;

  const TrainedModel& best_model() const { return runs.at(best_run).model; }
};

/// N runs with seeds derived from base_seed; the best run maximizes tp+tn-fp-fn
/// (earliest wins ties).
RepeatedEval repeated_eval(Method method, const Corpus& normal, const Corpus& abnormal, int iterations,
                           std::uint64_t base_seed, const EvalSettings& settings);

void save_trained_model(const TrainedModel& model, const std::filesystem::path& path);
/// Dispatches on the file's magic string.
TrainedModel load_trained_model(const std::filesystem::path& path);
Detections detect_with(const TrainedModel& model, const Corpus& raw);

/// Half-up rounding used in the report table.
long long round_half_up(double value);

struct ReportContext {
  std::uint64_t base_seed = 0;
  int iterations = 0;
  std::string config_digest;
};

/// Comment header, then `Data,Status,Size,<M>_TPR,<M>_FPR,...` with one column
/// pair per method present (order DAE, VAE, IF).
std::string format_report(const std::vector<AggregateRow>& rows, const ReportContext& context);
void emit_report(const std::vector<AggregateRow>& rows, const ReportContext& context,
                 const std::filesystem::path& path);

}  // namespace trajnorm
