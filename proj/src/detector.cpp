#include "trajnorm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "trajnorm/text_io.hpp"

namespace trajnorm {

MinMaxScaler fit_scaler(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0 || samples.cols() == 0) throw Error("fit_scaler: no samples");
  MinMaxScaler s;
  s.min = samples.colwise().minCoeff();
  s.max = samples.colwise().maxCoeff();
  for (Eigen::Index c = 0; c < s.min.size(); ++c) {
    if (!(s.max(c) > s.min(c))) s.max(c) = s.min(c) + 1.0;
  }
  return s;
}

namespace {

void check_scaler(const MinMaxScaler& scaler, Eigen::Index cols, const char* who) {
  if (!scaler.fitted()) throw Error(std::string(who) + ": scaler is not fitted");
  if (cols != scaler.features()) {
    throw Error(std::string(who) + ": expected " + std::to_string(scaler.features()) + " features, got " +
                std::to_string(cols));
  }
}

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double population_std(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().mean());
}

}  // namespace

Eigen::MatrixXd transform(const MinMaxScaler& scaler, const Eigen::MatrixXd& samples) {
  check_scaler(scaler, samples.cols(), "transform");
  const Eigen::RowVectorXd range = scaler.max - scaler.min;
  Eigen::MatrixXd out = (samples.rowwise() - scaler.min).array().rowwise() / range.array();
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

Eigen::MatrixXd inverse_transform(const MinMaxScaler& scaler, const Eigen::MatrixXd& scaled) {
  check_scaler(scaler, scaled.cols(), "inverse_transform");
  const Eigen::RowVectorXd range = scaler.max - scaler.min;
  Eigen::MatrixXd out = scaled.array().rowwise() * range.array();
  return out.rowwise() + scaler.min;
}

std::string_view decision_name(Decision decision) {
  return decision == Decision::normal ? "normal" : "abnormal";
}

void DetectorModel::validate() const {
  if (network.layers.empty()) throw Error("model: network has no layers");
  for (std::size_t k = 1; k < network.layers.size(); ++k) {
    if (network.layers[k].in_units() != network.layers[k - 1].out_units()) {
      throw Error("model: layer " + std::to_string(k) + " input width does not match the previous layer");
    }
  }
  for (const auto& l : network.layers) {
    if (l.biases.size() != l.out_units()) throw Error("model: bias length does not match layer width");
  }
  if (network.input_size() != network.output_size()) throw Error("model: network is not an autoencoder");
  if (!scaler.fitted() || scaler.features() != network.input_size()) {
    throw Error("model: scaler width does not match the network input");
  }
  if (!network.all_finite()) throw Error("model: non-finite network parameters");
  if (!std::isfinite(threshold) || threshold < 0) throw Error("model: threshold must be finite and >= 0");
}

ScoreSet score(const Network<double>& network, const Eigen::MatrixXd& scaled, ScoreRole role) {
  if (scaled.cols() != network.input_size()) {
    throw Error("score: samples have " + std::to_string(scaled.cols()) + " features, network expects " +
                std::to_string(network.input_size()));
  }
  ScoreSet s;
  s.role = role;
  s.scores = scaled.rows() == 0 ? Eigen::VectorXd() : reconstruction_errors(network, scaled);
  return s;
}

ScoreSet score(const DetectorModel& model, const Eigen::MatrixXd& scaled, ScoreRole role) {
  return score(model.network, scaled, role);
}

double compute_threshold(const ScoreSet& train, const ScoreSet& validation) {
  if (train.size() == 0 || validation.size() == 0) throw Error("compute_threshold: empty score set");
  return mean_of(train.scores) + mean_of(validation.scores) +
         3.0 * (population_std(train.scores) + population_std(validation.scores));
}

std::size_t Detections::abnormal_count() const {
  return static_cast<std::size_t>(std::count(decisions.begin(), decisions.end(), Decision::abnormal));
}

Detections detect_batch(const DetectorModel& model, const Corpus& raw) {
  check_scaler(model.scaler, raw.cols(), "detect_batch");
  Detections d;
  d.threshold = model.threshold;
  d.scores = score(model, transform(model.scaler, raw)).scores;
  d.decisions.reserve(static_cast<std::size_t>(d.scores.size()));
  for (Eigen::Index i = 0; i < d.scores.size(); ++i) d.decisions.push_back(classify_score(d.scores(i), model.threshold));
  return d;
}

Decision classify(const DetectorModel& model, const PackedSample& raw) {
  Eigen::MatrixXd one = raw;
  return detect_batch(model, one).decisions.front();
}

void DetectorTrainConfig::validate() const {
  if (!(split_fraction > 0 && split_fraction < 1)) throw Error("detector: split_fraction must be in (0,1)");
  train.validate();
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> shuffled_split(Eigen::Index n, double fraction,
                                                                               std::uint64_t seed) {
  if (n < 2) throw Error("split: need at least 2 rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto head = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  head = std::clamp<Eigen::Index>(head, 1, n - 1);
  std::vector<Eigen::Index> first(order.begin(), order.begin() + head);
  std::vector<Eigen::Index> second(order.begin() + head, order.end());
  return {std::move(first), std::move(second)};
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

DetectorTraining train_autoencoder_detector(const Corpus& normal, const NetworkFactory& make_net,
                                            const DetectorTrainConfig& cfg, const std::string& method) {
  cfg.validate();
  if (normal.rows() < 10) throw Error("train_detector: need at least 10 normal samples, got " +
                                      std::to_string(normal.rows()));
  DetectorTraining out;
  std::tie(out.train_rows, out.validation_rows) =
      shuffled_split(normal.rows(), cfg.split_fraction, derive_seed(cfg.seed, "split"));
  if (out.train_rows.size() < 2) throw Error("train_detector: training split has fewer than 2 samples");

  const Eigen::MatrixXd tr_raw = select_rows(normal, out.train_rows);
  const Eigen::MatrixXd va_raw = select_rows(normal, out.validation_rows);

  auto net = make_net(static_cast<int>(normal.cols()), derive_seed(cfg.seed, "init"));
  if (net.input_size() != normal.cols() || net.output_size() != normal.cols()) {
    throw Error("train_detector: network width does not match the corpus");
  }

  out.model.scaler = fit_scaler(tr_raw);
  const Eigen::MatrixXd tr = transform(out.model.scaler, tr_raw);
  const Eigen::MatrixXd va = transform(out.model.scaler, va_raw);

  TrainConfig tc = cfg.train;
  tc.rng_seed = derive_seed(cfg.seed, "fit");
  auto fitted = fit(std::move(net), tr, tc);
  out.history = std::move(fitted.history);
  out.best_epoch = fitted.best_epoch;
  out.model.network = std::move(fitted.network);

  out.train_scores = score(out.model.network, tr, ScoreRole::train);
  out.validation_scores = score(out.model.network, va, ScoreRole::validation);
  out.model.threshold = compute_threshold(out.train_scores, out.validation_scores);

  const std::string cfg_text = "split=" + format_exact(cfg.split_fraction) +
                               " batch=" + std::to_string(tc.batch_size) + " epochs=" + std::to_string(tc.epochs) +
                               " lr=" + format_exact(tc.learning_rate) + " rho=" + format_exact(tc.rmsprop_decay) +
                               " eps=" + format_exact(tc.rmsprop_epsilon) + " cv=" + format_exact(tc.cv_fraction);
  out.model.metadata["method"] = method;
  out.model.metadata["seed"] = std::to_string(cfg.seed);
  out.model.metadata["config_digest"] = digest_hex(cfg_text);
  out.model.metadata["best_epoch"] = std::to_string(out.best_epoch + 1);
  out.model.metadata["train_samples"] = std::to_string(out.train_rows.size());
  out.model.metadata["validation_samples"] = std::to_string(out.validation_rows.size());
  out.model.metadata["created_by"] = "trajnorm-1";
  return out;
}

DetectorTraining train_detector(const Corpus& normal, const DetectorTrainConfig& cfg) {
  return train_autoencoder_detector(
      normal, [](int input, std::uint64_t seed) { return build_dae<double>(input, seed); }, cfg, "dae");
}

// Model file -----------------------------------------------------------------

TokenReader::TokenReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

void TokenReader::skip_space() {
  while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                 text_[pos_] == '\r')) {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
}

bool TokenReader::done() const {
  std::size_t p = pos_;
  while (p < text_.size() && (text_[p] == ' ' || text_[p] == '\t' || text_[p] == '\n' || text_[p] == '\r')) ++p;
  return p >= text_.size();
}

std::string_view TokenReader::next(const char* expecting) {
  skip_space();
  if (pos_ >= text_.size()) fail(std::string("truncated file, expected ") + expecting);
  const std::size_t start = pos_;
  while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\n' &&
         text_[pos_] != '\r') {
    ++pos_;
  }
  return text_.substr(start, pos_ - start);
}

void TokenReader::expect(std::string_view keyword) {
  const auto tok = next(std::string(keyword).c_str());
  if (tok != keyword) fail("expected '" + std::string(keyword) + "', found '" + std::string(tok) + "'");
}

double TokenReader::real(const char* expecting) {
  const auto tok = next(expecting);
  try {
    return parse_real(tok);
  } catch (const Error&) {
    fail(std::string("expected ") + expecting + ", found '" + std::string(tok) + "'");
  }
}

long long TokenReader::integer(const char* expecting) {
  const auto tok = next(expecting);
  try {
    return parse_integer(tok);
  } catch (const Error&) {
    fail(std::string("expected ") + expecting + ", found '" + std::string(tok) + "'");
  }
}

void TokenReader::fail(const std::string& what) const { throw ParseError(source_, line_, what); }

namespace {

void append_row(std::string& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_exact(row(i));
  }
  out += '\n';
}

void check_meta_token(const std::string& s) {
  if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error("model metadata keys and values must be non-empty and contain no whitespace: '" + s + "'");
  }
}

}  // namespace

std::string format_model(const DetectorModel& model) {
  model.validate();
  std::string out(kModelMagic);
  out += " v" + std::to_string(kModelVersion) + "\n";
  out += "layers " + std::to_string(model.network.layers.size()) + "\n";
  for (const auto& layer : model.network.layers) {
    out += "layer " + std::to_string(layer.in_units()) + " " + std::to_string(layer.out_units()) + " " +
           std::string(activation_name(layer.activation)) + "\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) append_row(out, layer.weights.row(r));
    append_row(out, layer.biases.transpose());
  }
  out += "scaler " + std::to_string(model.scaler.features()) + "\n";
  append_row(out, model.scaler.min);
  append_row(out, model.scaler.max);
  out += "tau " + format_exact(model.threshold) + "\n";
  for (const auto& [key, value] : model.metadata) {
    check_meta_token(key);
    check_meta_token(value);
    out += "meta " + key + " " + value + "\n";
  }
  out += "end\n";
  return out;
}

DetectorModel parse_model(std::string_view text) {
  TokenReader in(text, "<model>");
  const auto magic = in.next("magic string");
  if (magic != kModelMagic) in.fail("not a trajnorm model file (bad magic '" + std::string(magic) + "')");
  const auto version = in.next("version");
  if (version != "v" + std::to_string(kModelVersion)) {
    in.fail("unsupported model version '" + std::string(version) + "', expected v" + std::to_string(kModelVersion));
  }
  DetectorModel model;
  in.expect("layers");
  const auto layer_count = in.integer("layer count");
  if (layer_count < 1 || layer_count > 1000) in.fail("implausible layer count");
  for (long long k = 0; k < layer_count; ++k) {
    in.expect("layer");
    const auto fan_in = in.integer("layer input width");
    const auto fan_out = in.integer("layer output width");
    if (fan_in < 1 || fan_out < 1 || fan_in > 1'000'000 || fan_out > 1'000'000) in.fail("invalid layer width");
    DenseLayer<double> layer;
    try {
      layer.activation = parse_activation(in.next("activation"));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      in.fail(e.what());
    }
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weights(r, c) = in.real("weight");
    layer.biases.resize(fan_out);
    for (Eigen::Index r = 0; r < fan_out; ++r) layer.biases(r) = in.real("bias");
    model.network.layers.push_back(std::move(layer));
  }
  in.expect("scaler");
  const auto width = in.integer("scaler width");
  if (width < 1 || width > 1'000'000) in.fail("invalid scaler width");
  model.scaler.min.resize(width);
  model.scaler.max.resize(width);
  for (Eigen::Index i = 0; i < width; ++i) model.scaler.min(i) = in.real("scaler min");
  for (Eigen::Index i = 0; i < width; ++i) model.scaler.max(i) = in.real("scaler max");
  in.expect("tau");
  model.threshold = in.real("threshold");
  while (true) {
    const auto tok = in.next("'meta' or 'end'");
    if (tok == "end") break;
    if (tok != "meta") in.fail("expected 'meta' or 'end', found '" + std::string(tok) + "'");
    std::string key(in.next("metadata key"));
    model.metadata[key] = std::string(in.next("metadata value"));
  }
  if (!in.done()) in.fail("trailing content after 'end'");
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(std::string("invalid model file: ") + e.what());
  }
  return model;
}

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, format_model(model));
}

DetectorModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace trajnorm
