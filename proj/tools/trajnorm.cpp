// trajnorm: abnormal road-user trajectory detection from the command line.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "trajnorm/commands.hpp"
#include "trajnorm/text_io.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<long long> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Override the global seed")->check(CLI::NonNegativeNumber);
}

trajnorm::RunConfig load(const CommonOptions& opts) {
  trajnorm::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = trajnorm::load_config(opts.config_path);
  if (opts.seed) cfg.seed = static_cast<std::uint64_t>(*opts.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajnorm - deep autoencoder detector for abnormal road-user trajectories"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string annotations, corpus, model, out, method = "dae";

  auto* ingest = app.add_subcommand("ingest", "Extract, augment, window and pack annotated tracks into a corpus");
  add_common(ingest, common);
  ingest->add_option("--annotations", annotations, "Annotation file (overrides paths.annotations)");
  ingest->add_option("--out", out, "Corpus file to write (overrides paths.corpus)");

  auto* gen = app.add_subcommand("gen-abnormal", "Generate straight-line and transformed abnormal samples");
  add_common(gen, common);
  gen->add_option("--annotations", annotations, "Annotation file with the real tracks");
  gen->add_option("--out", out, "Abnormal corpus to write (overrides paths.abnormal)");

  auto* train = app.add_subcommand("train", "Train a detector on a normal corpus");
  add_common(train, common);
  train->add_option("--corpus", corpus, "Normal corpus (overrides paths.corpus)");
  train->add_option("--method", method, "Detector: dae, vae or if")->check(CLI::IsMember({"dae", "vae", "if"}));
  train->add_option("--out", out, "Model file to write (overrides paths.model)");

  auto* detect = app.add_subcommand("detect", "Score and classify samples with a trained model");
  detect->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  detect->add_option("--corpus", corpus, "Corpus to classify")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", out, "Write decisions here instead of stdout");

  auto* eval = app.add_subcommand("eval", "Repeated sub-sampling evaluation and comparison report");
  add_common(eval, common);
  eval->add_option("--out", out, "Report file (overrides paths.report)");

  auto* synth = app.add_subcommand("synth", "Write annotations for a synthetic two-flow intersection");
  add_common(synth, common);
  synth->add_option("--out", out, "Annotation file to write (overrides paths.annotations)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto cfg = load(common);
      trajnorm::cmd_ingest(cfg, annotations.empty() ? cfg.annotations_path : annotations,
                           out.empty() ? cfg.corpus_path : out, std::cout);
    } else if (*gen) {
      auto cfg = load(common);
      trajnorm::cmd_gen_abnormal(cfg, annotations.empty() ? cfg.annotations_path : annotations,
                                 out.empty() ? cfg.abnormal_path : out, std::cout);
    } else if (*train) {
      auto cfg = load(common);
      trajnorm::cmd_train(cfg, corpus.empty() ? cfg.corpus_path : corpus, trajnorm::parse_method(method),
                          out.empty() ? cfg.model_path : out, std::cout);
    } else if (*detect) {
      if (out.empty()) {
        trajnorm::cmd_detect(model, corpus, std::cout);
      } else {
        std::ostringstream buf;
        trajnorm::cmd_detect(model, corpus, buf);
        trajnorm::write_file_atomic(out, buf.str());
      }
    } else if (*eval) {
      auto cfg = load(common);
      if (!out.empty()) cfg.report_path = out;
      trajnorm::cmd_eval(cfg, std::cout);
    } else if (*synth) {
      auto cfg = load(common);
      trajnorm::cmd_synth(cfg, out.empty() ? cfg.annotations_path : out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
