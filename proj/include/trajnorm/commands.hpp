#pragma once

// The command-line workflow as library calls: ingest -> gen-abnormal ->
// train -> detect -> eval. Each command writes its outputs atomically.

#include <array>
#include <filesystem>
#include <ostream>

#include "trajnorm/config.hpp"

namespace trajnorm {

struct IngestSummary {
  std::size_t tracks = 0;
  std::size_t skipped_single_frame = 0;
  std::size_t samples = 0;
  std::array<std::size_t, 3> tracks_per_class{};
  std::array<std::size_t, 3> samples_per_class{};
};

IngestSummary cmd_ingest(const RunConfig& config, const std::filesystem::path& annotations,
                         const std::filesystem::path& out, std::ostream& log);

/// Straight-line abnormals followed by realistic ones, with a `source` column.
std::size_t cmd_gen_abnormal(const RunConfig& config, const std::filesystem::path& annotations,
                             const std::filesystem::path& out, std::ostream& log);

void cmd_train(const RunConfig& config, const std::filesystem::path& corpus, Method method,
               const std::filesystem::path& out_model, std::ostream& log);

/// Writes `index,score,tau,decision` lines; returns the number of samples.
std::size_t cmd_detect(const std::filesystem::path& model, const std::filesystem::path& corpus, std::ostream& out);

struct EvalOutputs {
  std::filesystem::path report;
  std::vector<std::filesystem::path> models;
};

/// Repeated evaluation of every configured method on the configured corpora;
/// writes the report and the best model of each method.
EvalOutputs cmd_eval(const RunConfig& config, std::ostream& log);

/// `<paths.model>.<method>`
std::filesystem::path best_model_path(const RunConfig& config, Method method);

/// Writes annotations for the synthetic two-flow intersection.
void cmd_synth(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

}  // namespace trajnorm
