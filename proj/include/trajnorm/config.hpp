#pragma once

// Run configuration: an INI-style file of `[section]` headers and
// `key = value` lines. Unknown sections or keys are errors.
//
// Every stage seed is derived from the single global seed:
//   augmentation  derive_seed(seed, "augment")
//   straight abn. derive_seed(seed, "straight")
//   realistic abn derive_seed(seed, "realistic")
//   training      derive_seed(seed, "train")
//   evaluation    derive_seed(seed, "eval")

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajnorm/baselines.hpp"
#include "trajnorm/detector.hpp"
#include "trajnorm/eval.hpp"
#include "trajnorm/pipeline.hpp"

namespace trajnorm {

struct RunConfig {
  std::uint64_t seed = 42;
  std::string dataset = "synthetic";

  std::string annotations_path = "annotations.csv";
  std::string corpus_path = "corpus.csv";
  std::string abnormal_path = "abnormal.csv";
  std::string model_path = "model.txt";
  std::string report_path = "report.csv";

  int augment_count = 50;
  double augment_sigma = 2.0;

  TrainConfig train;
  double split_fraction = 0.8;
  int vae_hidden = 8;

  IsolationForestConfig iforest;

  int eval_iterations = 10;
  std::vector<Method> eval_methods{Method::dae, Method::vae, Method::iforest};

  int straight_count = 0;
  double straight_speed_min = 1.0;
  double straight_speed_max = 10.0;
  std::vector<double> straight_headings_deg;
  int realistic_count = 0;
  std::vector<AbnormalTransform> transforms{AbnormalTransform::label_swap, AbnormalTransform::rotate,
                                            AbnormalTransform::mirror, AbnormalTransform::translate_offroad};
  double rotation_deg = 90.0;
  double offroad_dx = 0.0;
  double offroad_dy = 200.0;
  /// Scene used by the abnormal generators; unset means the bounding box of the tracks.
  std::optional<SceneBounds> scene;

  void validate() const;

  std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }
  AugmentConfig augment_config() const;
  DetectorTrainConfig detector_config() const;
  EvalSettings eval_settings() const;
};

RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Canonical form: every key, fixed order, exact reals.
std::string format_config(const RunConfig& config);
/// Digest of the canonical form.
std::string config_digest(const RunConfig& config);

}  // namespace trajnorm
