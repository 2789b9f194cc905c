#include "trajnorm/commands.hpp"

#include <iomanip>

#include "trajnorm/corpus_io.hpp"
#include "trajnorm/synthetic.hpp"
#include "trajnorm/text_io.hpp"

namespace trajnorm {

IngestSummary cmd_ingest(const RunConfig& config, const std::filesystem::path& annotations,
                         const std::filesystem::path& out, std::ostream& log) {
  const auto records = read_annotations(annotations);
  const auto extracted = extract_tracks(records);
  const Corpus corpus = build_corpus(extracted.tracks, config.augment_config());
  write_corpus(out, corpus);

  IngestSummary s;
  s.tracks = extracted.tracks.size();
  s.skipped_single_frame = extracted.skipped_single_frame;
  s.samples = static_cast<std::size_t>(corpus.rows());
  for (const auto& t : extracted.tracks) ++s.tracks_per_class[static_cast<std::size_t>(t.label)];
  for (Eigen::Index r = 0; r < corpus.rows(); ++r) ++s.samples_per_class[static_cast<std::size_t>(corpus(r, 0))];

  log << "tracks: " << s.tracks << " (skipped single-frame objects: " << s.skipped_single_frame << ")\n";
  for (int c = 0; c < 3; ++c) {
    log << "  " << label_name(static_cast<ClassLabel>(c)) << ": " << s.tracks_per_class[static_cast<std::size_t>(c)]
        << " tracks, " << s.samples_per_class[static_cast<std::size_t>(c)] << " samples\n";
  }
  log << "samples: " << s.samples << " -> " << out.string() << "\n";
  return s;
}

std::size_t cmd_gen_abnormal(const RunConfig& config, const std::filesystem::path& annotations,
                             const std::filesystem::path& out, std::ostream& log) {
  if (config.transforms.empty()) throw Error("gen-abnormal: transform set is empty");
  const auto tracks = extract_tracks(read_annotations(annotations)).tracks;
  const SceneBounds scene = config.scene ? *config.scene : bounds_of(tracks);

  StraightAbnormalConfig straight;
  straight.bounds = scene;
  straight.count = config.straight_count;
  straight.speed_min = config.straight_speed_min;
  straight.speed_max = config.straight_speed_max;
  straight.headings_deg = config.straight_headings_deg;
  const Corpus lines = gen_straight_abnormal(straight, config.stage_seed("straight"));

  RealisticAbnormalConfig realistic;
  realistic.transforms = config.transforms;
  realistic.count = config.realistic_count;
  realistic.bounds = scene;
  realistic.rotation_deg = config.rotation_deg;
  realistic.offroad_dx = config.offroad_dx;
  realistic.offroad_dy = config.offroad_dy;
  const auto transformed = gen_realistic_abnormal(tracks, realistic, config.stage_seed("realistic"));

  Corpus all(lines.rows() + transformed.samples.rows(), kPackedWidth);
  all.topRows(lines.rows()) = lines;
  all.bottomRows(transformed.samples.rows()) = transformed.samples;
  std::vector<std::string> provenance(static_cast<std::size_t>(lines.rows()), "straight");
  provenance.insert(provenance.end(), transformed.provenance.begin(), transformed.provenance.end());
  write_corpus(out, all, provenance);

  log << "abnormal samples: " << all.rows() << " (straight " << lines.rows() << ", realistic "
      << transformed.samples.rows() << ") -> " << out.string() << "\n";
  return static_cast<std::size_t>(all.rows());
}

void cmd_train(const RunConfig& config, const std::filesystem::path& corpus, Method method,
               const std::filesystem::path& out_model, std::ostream& log) {
  const Corpus normal = read_corpus(corpus).samples;
  const auto dcfg = config.detector_config();
  log << "method: " << method_label(method) << "\n";
  if (method == Method::iforest) {
    log << "trees: " << config.iforest.tree_count << "  subsample: " << config.iforest.subsample_size
        << "  contamination: " << config.iforest.contamination << "\n";
    const auto forest = if_fit(normal, config.iforest, config.stage_seed("train"));
    save_forest(forest, out_model);
    log << "score threshold: " << format_exact(forest.score_threshold) << "\n";
    log << "model -> " << out_model.string() << "\n";
    return;
  }
  const auto& t = dcfg.train;
  log << "input size: " << kPackedWidth << "\n";
  if (method == Method::dae) {
    log << "layers: 125-128-64-32-16-8-16-32-64-128-125 (ReLU hidden, Sigmoid output)\n";
  } else {
    log << "layers: 125-" << config.vae_hidden << "-125 (ReLU hidden, Sigmoid output)\n";
  }
  log << "batch size: " << t.batch_size << "  epochs: " << t.epochs << "  optimiser: RMSprop"
      << "  learning rate: " << t.learning_rate << "  loss: MSE\n";
  log << "rmsprop decay: " << t.rmsprop_decay << "  epsilon: " << t.rmsprop_epsilon
      << "  cv fraction: " << t.cv_fraction << "  train/validation split: " << dcfg.split_fraction << "\n";

  const auto trained = method == Method::dae ? train_detector(normal, dcfg) : vae_detector(normal, dcfg, config.vae_hidden);
  for (std::size_t e = 0; e < trained.history.size(); ++e) {
    log << "epoch " << std::setw(3) << e + 1 << "  train " << format_shortest(trained.history[e].train_loss)
        << "  cv " << format_shortest(trained.history[e].cv_loss) << "\n";
  }
  auto model = trained.model;
  model.metadata["config_digest"] = config_digest(config);
  save_model(model, out_model);
  log << "kept epoch: " << trained.best_epoch + 1 << "\n";
  log << "tau: " << format_exact(model.threshold) << "\n";
  log << "model -> " << out_model.string() << "\n";
}

std::size_t cmd_detect(const std::filesystem::path& model, const std::filesystem::path& corpus, std::ostream& out) {
  const auto trained = load_trained_model(model);
  const Corpus samples = read_corpus(corpus).samples;
  out << "index,score,tau,decision\n";
  if (samples.rows() == 0) return 0;
  const auto det = detect_with(trained, samples);
  for (Eigen::Index i = 0; i < det.scores.size(); ++i) {
    out << i << ',' << format_exact(det.scores(i)) << ',' << format_exact(det.threshold) << ','
        << decision_name(det.decisions[static_cast<std::size_t>(i)]) << '\n';
  }
  return static_cast<std::size_t>(samples.rows());
}

std::filesystem::path best_model_path(const RunConfig& config, Method method) {
  return config.model_path + "." + std::string(method_key(method));
}

EvalOutputs cmd_eval(const RunConfig& config, std::ostream& log) {
  const Corpus normal = read_corpus(config.corpus_path).samples;
  const Corpus abnormal = read_corpus(config.abnormal_path).samples;
  const auto settings = config.eval_settings();
  const auto base_seed = config.stage_seed("eval");

  EvalOutputs outputs;
  std::vector<AggregateRow> summary;
  for (auto method : config.eval_methods) {
    log << "evaluating " << method_label(method) << " (" << config.eval_iterations << " runs)\n";
    const auto result = repeated_eval(method, normal, abnormal, config.eval_iterations, base_seed, settings);
    for (const auto& run : result.runs) {
      log << "  run " << run.iteration << ": tp=" << run.counts.tp << " tn=" << run.counts.tn
          << " fp=" << run.counts.fp << " fn=" << run.counts.fn << "\n";
    }
    const auto path = best_model_path(config, method);
    save_trained_model(result.best_model(), path);
    log << "  best run " << result.best_run << " -> " << path.string() << "\n";
    outputs.models.push_back(path);
    summary.insert(summary.end(), result.summary.begin(), result.summary.end());
  }
  ReportContext context{config.seed, config.eval_iterations, config_digest(config)};
  emit_report(summary, context, config.report_path);
  outputs.report = config.report_path;
  log << "report -> " << config.report_path << "\n";
  return outputs;
}

void cmd_synth(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
  const auto records = synthesize_crossing_scene(SyntheticSceneConfig{}, config.stage_seed("scene"));
  write_file_atomic(out, format_annotations(records));
  log << "synthetic annotations: " << records.size() << " boxes -> " << out.string() << "\n";
}

}  // namespace trajnorm
