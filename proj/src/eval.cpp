#include "trajnorm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "trajnorm/text_io.hpp"

namespace trajnorm {

std::string_view method_label(Method method) {
  switch (method) {
    case Method::dae:
      return "DAE";
    case Method::vae:
      return "VAE";
    case Method::iforest:
      return "IF";
  }
  return "?";
}

std::string_view method_key(Method method) {
  switch (method) {
    case Method::dae:
      return "dae";
    case Method::vae:
      return "vae";
    case Method::iforest:
      return "if";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "dae") return Method::dae;
  if (name == "vae") return Method::vae;
  if (name == "if") return Method::iforest;
  throw Error("unknown method '" + std::string(name) + "' (expected dae, vae or if)");
}

std::string_view status_name(Status status) { return status == Status::normal ? "normal" : "abnormal"; }

ConfusionCounts count_decisions(const std::vector<Decision>& on_normals, const std::vector<Decision>& on_abnormals) {
  ConfusionCounts c;
  for (auto d : on_normals) (d == Decision::normal ? c.tn : c.fp)++;
  for (auto d : on_abnormals) (d == Decision::abnormal ? c.tp : c.fn)++;
  return c;
}

namespace {

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

std::vector<RunMetrics> rows_from_counts(const ConfusionCounts& c, Method method, const std::string& dataset,
                                         int iteration, std::uint64_t seed) {
  RunMetrics normal{method, dataset, Status::normal, c.normals(), percent(c.tn, c.normals()),
                    percent(c.fn, c.abnormals()), iteration, seed};
  RunMetrics abnormal{method, dataset, Status::abnormal, c.abnormals(), percent(c.tp, c.abnormals()),
                      percent(c.fp, c.normals()), iteration, seed};
  return {normal, abnormal};
}

EvalRun evaluate_once(Method method, const Corpus& normal, const Corpus& abnormal, std::uint64_t seed,
                      const EvalSettings& settings, int iteration) {
  if (normal.rows() == 0 || abnormal.rows() == 0) throw Error("evaluate: normal and abnormal corpora must be non-empty");
  if (abnormal.cols() != normal.cols()) throw Error("evaluate: corpora have different widths");

  EvalRun run;
  run.iteration = iteration;
  run.seed = seed;
  DetectorTrainConfig dcfg = settings.detector;
  dcfg.seed = seed;

  Detections on_normal, on_abnormal;
  switch (method) {
    case Method::dae:
    case Method::vae: {
      auto trained = method == Method::dae ? train_detector(normal, dcfg) : vae_detector(normal, dcfg, settings.vae_hidden);
      on_normal = detect_batch(trained.model, select_rows(normal, trained.validation_rows));
      on_abnormal = detect_batch(trained.model, abnormal);
      run.model = std::move(trained.model);
      break;
    }
    case Method::iforest: {
      dcfg.validate();
      // Same split as the autoencoder detectors for a given seed.
      auto [tr, va] = shuffled_split(normal.rows(), dcfg.split_fraction, derive_seed(seed, "split"));
      auto forest = if_fit(select_rows(normal, tr), settings.iforest, derive_seed(seed, "iforest"));
      on_normal = if_detect_batch(forest, select_rows(normal, va));
      on_abnormal = if_detect_batch(forest, abnormal);
      run.model = std::move(forest);
      break;
    }
  }
  run.counts = count_decisions(on_normal.decisions, on_abnormal.decisions);
  run.rows = rows_from_counts(run.counts, method, settings.dataset, iteration, seed);
  return run;
}

namespace {

struct Stats {
  double mean = 0, std = 0, min = 0, max = 0;
};

Stats stats_of(std::vector<double> values) {
  // Sorted summation makes the result independent of run order.
  std::sort(values.begin(), values.end());
  Stats s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  std::vector<double> dev;
  for (double v : values) dev.push_back((v - s.mean) * (v - s.mean));
  std::sort(dev.begin(), dev.end());
  for (double d : dev) sq += d;
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  s.min = values.front();
  s.max = values.back();
  return s;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows) {
  using Key = std::tuple<int, std::string, int>;
  std::map<Key, std::vector<const RunMetrics*>> groups;
  for (const auto& r : rows) {
    groups[{static_cast<int>(r.method), r.dataset, static_cast<int>(r.status)}].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    AggregateRow a;
    a.method = members.front()->method;
    a.dataset = members.front()->dataset;
    a.status = members.front()->status;
    a.runs = members.size();
    std::vector<double> tpr, fpr;
    std::size_t size = members.front()->size;
    for (const auto* m : members) {
      tpr.push_back(m->tpr);
      fpr.push_back(m->fpr);
      size = std::max(size, m->size);
    }
    a.size = size;
    const auto t = stats_of(tpr);
    const auto f = stats_of(fpr);
    a.tpr_mean = t.mean;
    a.tpr_std = t.std;
    a.tpr_min = t.min;
    a.tpr_max = t.max;
    a.fpr_mean = f.mean;
    a.fpr_std = f.std;
    a.fpr_min = f.min;
    a.fpr_max = f.max;
    out.push_back(std::move(a));
  }
  return out;
}

RepeatedEval repeated_eval(Method method, const Corpus& normal, const Corpus& abnormal, int iterations,
                           std::uint64_t base_seed, const EvalSettings& settings) {
  if (iterations < 1) throw Error("repeated_eval: iterations must be >= 1");
  RepeatedEval result;
  std::vector<RunMetrics> all_rows;
  for (int i = 0; i < iterations; ++i) {
    const auto seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
    auto run = evaluate_once(method, normal, abnormal, seed, settings, i);
    all_rows.insert(all_rows.end(), run.rows.begin(), run.rows.end());
    result.runs.push_back(std::move(run));
  }
  for (std::size_t i = 1; i < result.runs.size(); ++i) {
    if (result.runs[i].counts.selection_score() > result.runs[result.best_run].counts.selection_score()) {
      result.best_run = i;
    }
  }
  result.summary = aggregate(all_rows);
  return result;
}

void save_trained_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DetectorModel>) {
          save_model(m, path);
        } else {
          save_forest(m, path);
        }
      },
      model);
}

TrainedModel load_trained_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    if (text.rfind(kForestMagic, 0) == 0) return parse_forest(text);
    return parse_model(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

Detections detect_with(const TrainedModel& model, const Corpus& raw) {
  return std::visit(
      [&](const auto& m) -> Detections {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DetectorModel>) {
          return detect_batch(m, raw);
        } else {
          return if_detect_batch(m, raw);
        }
      },
      model);
}

long long round_half_up(double value) { return static_cast<long long>(std::floor(value + 0.5)); }

std::string format_report(const std::vector<AggregateRow>& rows, const ReportContext& context) {
  if (rows.empty()) throw Error("emit_report: no metrics");

  std::vector<Method> methods;
  for (auto m : {Method::dae, Method::vae, Method::iforest}) {
    if (std::any_of(rows.begin(), rows.end(), [m](const auto& r) { return r.method == m; })) methods.push_back(m);
  }
  // (dataset, status) in first-seen order of a stable sort.
  std::vector<std::pair<std::string, Status>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, Status> k{r.dataset, r.status};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });

  auto find = [&](const std::string& dataset, Status status, Method m) -> const AggregateRow* {
    for (const auto& r : rows)
      if (r.dataset == dataset && r.status == status && r.method == m) return &r;
    return nullptr;
  };

  std::string out;
  out += "# trajnorm detection report\n";
  out += "# rates in percent; positive class = abnormal\n";
  out += "# normal row: TPR = normals classified Normal / normals; FPR = abnormals classified Normal / abnormals\n";
  out += "# abnormal row: TPR = abnormals classified Abnormal / abnormals; FPR = normals classified Abnormal / normals\n";
  out += "# Size = evaluated population (held-out normal validation samples, all abnormal samples)\n";
  out += "# table values are run means rounded half-up; OC-SVM columns are not produced\n";
  out += "# base_seed=" + std::to_string(context.base_seed) + " iterations=" + std::to_string(context.iterations) +
         " config_digest=" + (context.config_digest.empty() ? std::string("none") : context.config_digest) + "\n";
  for (const auto& [dataset, status] : keys) {
    for (auto m : methods) {
      const auto* r = find(dataset, status, m);
      if (!r) continue;
      out += "# precise " + dataset + " " + std::string(status_name(status)) + " " + std::string(method_label(m)) +
             " runs=" + std::to_string(r->runs) + " tpr_mean=" + format_exact(r->tpr_mean) +
             " tpr_std=" + format_exact(r->tpr_std) + " fpr_mean=" + format_exact(r->fpr_mean) +
             " fpr_std=" + format_exact(r->fpr_std) + "\n";
    }
  }

  out += "Data,Status,Size";
  for (auto m : methods) {
    const std::string label(method_label(m));
    out += "," + label + "_TPR," + label + "_FPR";
  }
  out += '\n';
  for (const auto& [dataset, status] : keys) {
    std::size_t size = 0;
    for (auto m : methods) {
      if (const auto* r = find(dataset, status, m)) {
        if (size != 0 && r->size != size) throw Error("emit_report: methods were evaluated on different populations");
        size = r->size;
      }
    }
    out += dataset + "," + std::string(status_name(status)) + "," + std::to_string(size);
    for (auto m : methods) {
      const auto* r = find(dataset, status, m);
      if (r) {
        out += "," + std::to_string(round_half_up(r->tpr_mean)) + "," + std::to_string(round_half_up(r->fpr_mean));
      } else {
        out += ",,";
      }
    }
    out += '\n';
  }
  return out;
}

void emit_report(const std::vector<AggregateRow>& rows, const ReportContext& context,
                 const std::filesystem::path& path) {
  write_file_atomic(path, format_report(rows, context));
}

}  // namespace trajnorm
