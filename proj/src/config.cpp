#include "trajnorm/config.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include "trajnorm/text_io.hpp"

namespace trajnorm {

namespace {

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_shortest(values[i]);
  }
  return out.empty() ? "any" : out;
}

std::vector<std::string_view> list_items(std::string_view value) {
  std::vector<std::string_view> items;
  for (auto part : split(value, ',')) {
    part = trim(part);
    if (!part.empty()) items.push_back(part);
  }
  return items;
}

int to_int(std::string_view v) {
  const auto n = parse_integer(v);
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) throw Error("integer out of range");
  return static_cast<int>(n);
}

std::uint64_t to_seed(std::string_view v) {
  const auto n = parse_integer(v);
  if (n < 0) throw Error("seed must be non-negative");
  return static_cast<std::uint64_t>(n);
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"run.seed", [](RunConfig& c, std::string_view v) { c.seed = to_seed(v); }},
      {"run.dataset",
       [](RunConfig& c, std::string_view v) {
         if (v.empty() || v.find_first_of(" ,\t") != std::string_view::npos) {
           throw Error("dataset id must be non-empty without spaces or commas");
         }
         c.dataset = std::string(v);
       }},
      {"paths.annotations", [](RunConfig& c, std::string_view v) { c.annotations_path = std::string(v); }},
      {"paths.corpus", [](RunConfig& c, std::string_view v) { c.corpus_path = std::string(v); }},
      {"paths.abnormal", [](RunConfig& c, std::string_view v) { c.abnormal_path = std::string(v); }},
      {"paths.model", [](RunConfig& c, std::string_view v) { c.model_path = std::string(v); }},
      {"paths.report", [](RunConfig& c, std::string_view v) { c.report_path = std::string(v); }},
      {"augment.count_per_track", [](RunConfig& c, std::string_view v) { c.augment_count = to_int(v); }},
      {"augment.position_noise_sigma", [](RunConfig& c, std::string_view v) { c.augment_sigma = parse_real(v); }},
      {"train.batch_size", [](RunConfig& c, std::string_view v) { c.train.batch_size = to_int(v); }},
      {"train.epochs", [](RunConfig& c, std::string_view v) { c.train.epochs = to_int(v); }},
      {"train.learning_rate", [](RunConfig& c, std::string_view v) { c.train.learning_rate = parse_real(v); }},
      {"train.rmsprop_decay", [](RunConfig& c, std::string_view v) { c.train.rmsprop_decay = parse_real(v); }},
      {"train.rmsprop_epsilon", [](RunConfig& c, std::string_view v) { c.train.rmsprop_epsilon = parse_real(v); }},
      {"train.cv_fraction", [](RunConfig& c, std::string_view v) { c.train.cv_fraction = parse_real(v); }},
      {"train.split_fraction", [](RunConfig& c, std::string_view v) { c.split_fraction = parse_real(v); }},
      {"train.vae_hidden", [](RunConfig& c, std::string_view v) { c.vae_hidden = to_int(v); }},
      {"iforest.trees", [](RunConfig& c, std::string_view v) { c.iforest.tree_count = to_int(v); }},
      {"iforest.subsample", [](RunConfig& c, std::string_view v) { c.iforest.subsample_size = to_int(v); }},
      {"iforest.contamination", [](RunConfig& c, std::string_view v) { c.iforest.contamination = parse_real(v); }},
      {"eval.iterations", [](RunConfig& c, std::string_view v) { c.eval_iterations = to_int(v); }},
      {"eval.methods",
       [](RunConfig& c, std::string_view v) {
         c.eval_methods.clear();
         for (auto item : list_items(v)) c.eval_methods.push_back(parse_method(item));
       }},
      {"abnormal.straight_count", [](RunConfig& c, std::string_view v) { c.straight_count = to_int(v); }},
      {"abnormal.speed_min", [](RunConfig& c, std::string_view v) { c.straight_speed_min = parse_real(v); }},
      {"abnormal.speed_max", [](RunConfig& c, std::string_view v) { c.straight_speed_max = parse_real(v); }},
      {"abnormal.headings",
       [](RunConfig& c, std::string_view v) {
         c.straight_headings_deg.clear();
         if (trim(v) == "any") return;
         for (auto item : list_items(v)) c.straight_headings_deg.push_back(parse_real(item));
       }},
      {"abnormal.realistic_count", [](RunConfig& c, std::string_view v) { c.realistic_count = to_int(v); }},
      {"abnormal.transforms",
       [](RunConfig& c, std::string_view v) {
         c.transforms.clear();
         for (auto item : list_items(v)) {
           auto t = parse_transform(item);
           if (!t) throw Error("unknown transform '" + std::string(item) + "'");
           c.transforms.push_back(*t);
         }
       }},
      {"abnormal.rotation_deg", [](RunConfig& c, std::string_view v) { c.rotation_deg = parse_real(v); }},
      {"abnormal.offroad_dx", [](RunConfig& c, std::string_view v) { c.offroad_dx = parse_real(v); }},
      {"abnormal.offroad_dy", [](RunConfig& c, std::string_view v) { c.offroad_dy = parse_real(v); }},
      {"abnormal.scene",
       [](RunConfig& c, std::string_view v) {
         if (trim(v) == "auto") {
           c.scene.reset();
           return;
         }
         auto items = list_items(v);
         if (items.size() != 4) throw Error("scene must be 'auto' or x_min,y_min,x_max,y_max");
         c.scene = SceneBounds{parse_real(items[0]), parse_real(items[1]), parse_real(items[2]), parse_real(items[3])};
       }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (augment_count < 0) throw Error("config: augment.count_per_track must be >= 0");
  if (!(augment_sigma >= 0)) throw Error("config: augment.position_noise_sigma must be >= 0");
  train.validate();
  if (!(split_fraction > 0 && split_fraction < 1)) throw Error("config: train.split_fraction must be in (0,1)");
  if (vae_hidden < 1) throw Error("config: train.vae_hidden must be >= 1");
  iforest.validate();
  if (eval_iterations < 1) throw Error("config: eval.iterations must be >= 1");
  if (eval_methods.empty()) throw Error("config: eval.methods is empty");
  if (straight_count < 0 || realistic_count < 0) throw Error("config: abnormal counts must be >= 0");
  if (!(straight_speed_min >= 0 && straight_speed_min <= straight_speed_max)) {
    throw Error("config: abnormal speed range must satisfy 0 <= speed_min <= speed_max");
  }
  if (transforms.empty()) throw Error("config: abnormal.transforms is empty");
  if (scene && !scene->valid()) throw Error("config: abnormal.scene is not a valid rectangle");
}

AugmentConfig RunConfig::augment_config() const {
  return AugmentConfig{augment_count, augment_sigma, stage_seed("augment")};
}

DetectorTrainConfig RunConfig::detector_config() const {
  DetectorTrainConfig d;
  d.split_fraction = split_fraction;
  d.train = train;
  d.seed = stage_seed("train");
  return d;
}

EvalSettings RunConfig::eval_settings() const {
  EvalSettings s;
  s.dataset = dataset;
  s.detector = detector_config();
  s.vae_hidden = vae_hidden;
  s.iforest = iforest;
  return s;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig config;
  std::string section;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"run", "paths", "augment", "train", "iforest", "eval", "abnormal"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw ParseError(source, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    if (section.empty()) throw ParseError(source, line_no, "key outside of a section");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(source, line_no, "unknown key '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw ParseError(source, line_no, "duplicate key '" + key + "' (first set on line " +
                                            std::to_string(prev->second) + ")");
    }
    seen[key] = line_no;
    try {
      it->second(config, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, key + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path), path.string()); }

std::string format_config(const RunConfig& c) {
  std::string methods;
  for (auto m : c.eval_methods) methods += (methods.empty() ? "" : ",") + std::string(method_key(m));
  std::string transforms;
  for (auto t : c.transforms) transforms += (transforms.empty() ? "" : ",") + std::string(transform_name(t));
  const std::string scene =
      c.scene ? format_shortest(c.scene->x_min) + "," + format_shortest(c.scene->y_min) + "," + format_shortest(c.scene->x_max) +
                    "," + format_shortest(c.scene->y_max)
              : "auto";

  std::string out;
  out += "[run]\nseed = " + std::to_string(c.seed) + "\ndataset = " + c.dataset + "\n\n";
  out += "[paths]\nannotations = " + c.annotations_path + "\ncorpus = " + c.corpus_path + "\nabnormal = " +
         c.abnormal_path + "\nmodel = " + c.model_path + "\nreport = " + c.report_path + "\n\n";
  out += "[augment]\ncount_per_track = " + std::to_string(c.augment_count) +
         "\nposition_noise_sigma = " + format_shortest(c.augment_sigma) + "\n\n";
  out += "[train]\nbatch_size = " + std::to_string(c.train.batch_size) + "\nepochs = " +
         std::to_string(c.train.epochs) + "\nlearning_rate = " + format_shortest(c.train.learning_rate) +
         "\nrmsprop_decay = " + format_shortest(c.train.rmsprop_decay) + "\nrmsprop_epsilon = " +
         format_shortest(c.train.rmsprop_epsilon) + "\ncv_fraction = " + format_shortest(c.train.cv_fraction) +
         "\nsplit_fraction = " + format_shortest(c.split_fraction) + "\nvae_hidden = " + std::to_string(c.vae_hidden) +
         "\n\n";
  out += "[iforest]\ntrees = " + std::to_string(c.iforest.tree_count) + "\nsubsample = " +
         std::to_string(c.iforest.subsample_size) + "\ncontamination = " + format_shortest(c.iforest.contamination) +
         "\n\n";
  out += "[eval]\niterations = " + std::to_string(c.eval_iterations) + "\nmethods = " + methods + "\n\n";
  out += "[abnormal]\nstraight_count = " + std::to_string(c.straight_count) + "\nspeed_min = " +
         format_shortest(c.straight_speed_min) + "\nspeed_max = " + format_shortest(c.straight_speed_max) +
         "\nheadings = " + join_reals(c.straight_headings_deg) + "\nrealistic_count = " +
         std::to_string(c.realistic_count) + "\ntransforms = " + transforms + "\nrotation_deg = " +
         format_shortest(c.rotation_deg) + "\noffroad_dx = " + format_shortest(c.offroad_dx) + "\noffroad_dy = " +
         format_shortest(c.offroad_dy) + "\nscene = " + scene + "\n";
  return out;
}

std::string config_digest(const RunConfig& config) { return digest_hex(format_config(config)); }

}  // namespace trajnorm
