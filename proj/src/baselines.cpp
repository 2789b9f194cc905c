#include "trajnorm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "trajnorm/text_io.hpp"

namespace trajnorm {

double harmonic_number(std::int64_t m) {
  if (m <= 0) return 0.0;
  if (m < 20) {
    double h = 0.0;
    for (std::int64_t i = m; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
  }
  // Asymptotic expansion; the first omitted term is below 1e-15 for m >= 20.
  const double x = static_cast<double>(m);
  const double inv2 = 1.0 / (x * x);
  const double tail = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 / 240)));
  return std::log(x) + std::numbers::egamma + 0.5 / x - tail;
}

double average_path_length(std::int64_t n) {
  if (n <= 1) return 0.0;
  const auto nd = static_cast<double>(n);
  return 2.0 * harmonic_number(n - 1) - 2.0 * (nd - 1.0) / nd;
}

double IsolationTree::path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  int edges = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x(n.feature) < n.split ? n.left : n.right;
    ++edges;
  }
  return edges + average_path_length(nodes[static_cast<std::size_t>(i)].size);
}

int IsolationTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    deepest = std::max(deepest, depth[i]);
    if (!n.is_leaf()) {
      depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    }
  }
  return deepest;
}

int IsolationTree::split_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return !n.is_leaf(); }));
}

void IsolationForestConfig::validate() const {
  if (tree_count < 1) throw Error("isolation forest: tree_count must be >= 1");
  if (subsample_size < 2) throw Error("isolation forest: subsample_size must be >= 2");
  if (!(contamination > 0 && contamination < 0.5)) throw Error("isolation forest: contamination must be in (0, 0.5)");
}

int IsolationForestModel::depth_limit() const {
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(subsample_size))));
}

void IsolationForestModel::validate() const {
  if (trees.empty()) throw Error("isolation forest: no trees");
  if (subsample_size < 2) throw Error("isolation forest: subsample size must be >= 2");
  if (features < 1) throw Error("isolation forest: feature count must be positive");
  if (!(contamination > 0 && contamination < 0.5)) throw Error("isolation forest: contamination out of range");
  if (!std::isfinite(score_threshold)) throw Error("isolation forest: non-finite threshold");
  for (const auto& t : trees) {
    if (t.nodes.empty()) throw Error("isolation forest: empty tree");
    const auto count = static_cast<int>(t.nodes.size());
    for (int i = 0; i < count; ++i) {
      const auto& n = t.nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) {
        if (n.size < 0) throw Error("isolation forest: negative leaf size");
        continue;
      }
      if (n.feature >= features || n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
        throw Error("isolation forest: malformed tree node");
      }
    }
  }
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& data, int depth_limit, std::mt19937_64& rng)
      : data_(data), depth_limit_(depth_limit), rng_(rng) {}

  IsolationTree build(std::vector<Eigen::Index> rows) {
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Eigen::Index>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    if (depth >= depth_limit_ || rows.size() <= 1) return make_leaf(index, rows);

    // Features whose values vary inside this node.
    spread_.clear();
    lo_.resize(data_.cols());
    hi_.resize(data_.cols());
    for (Eigen::Index f = 0; f < data_.cols(); ++f) {
      double lo = data_(rows.front(), f);
      double hi = lo;
      for (auto r : rows) {
        lo = std::min(lo, data_(r, f));
        hi = std::max(hi, data_(r, f));
      }
      lo_[f] = lo;
      hi_[f] = hi;
      if (hi > lo) spread_.push_back(static_cast<int>(f));
    }
    if (spread_.empty()) return make_leaf(index, rows);

    std::uniform_int_distribution<std::size_t> pick(0, spread_.size() - 1);
    const int feature = spread_[pick(rng_)];
    const double lo = lo_[feature];
    const double hi = hi_[feature];
    std::uniform_real_distribution<double> value(lo, hi);
    double split = value(rng_);
    while (!(split > lo && split < hi)) split = value(rng_);

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (data_(r, feature) < split ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = feature;
    node.split = split;
    node.left = l;
    node.right = r;
    node.size = 0;
    return index;
  }

  int make_leaf(int index, const std::vector<Eigen::Index>& rows) {
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = -1;
    node.size = static_cast<int>(rows.size());
    return index;
  }

  const Eigen::MatrixXd& data_;
  int depth_limit_;
  std::mt19937_64& rng_;
  IsolationTree tree_;
  std::vector<int> spread_;
  Eigen::VectorXd lo_, hi_;
};

}  // namespace

IsolationForestModel if_fit(const Eigen::MatrixXd& samples, const IsolationForestConfig& cfg,
                            std::uint64_t rng_seed) {
  cfg.validate();
  const Eigen::Index n = samples.rows();
  if (n < 2) throw Error("if_fit: need at least 2 samples");
  if (!samples.allFinite()) throw Error("if_fit: non-finite sample values");
  const bool splittable =
      ((samples.colwise().maxCoeff() - samples.colwise().minCoeff()).array() > 0.0).any();
  if (!splittable) throw Error("if_fit: every feature is constant; nothing to split on");

  IsolationForestModel model;
  model.features = static_cast<int>(samples.cols());
  model.contamination = cfg.contamination;
  model.subsample_size = static_cast<int>(std::min<Eigen::Index>(cfg.subsample_size, n));
  const int depth_limit = model.depth_limit();

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  model.trees.reserve(static_cast<std::size_t>(cfg.tree_count));
  for (int t = 0; t < cfg.tree_count; ++t) {
    std::mt19937_64 rng(derive_seed(rng_seed, static_cast<std::uint64_t>(t)));
    // Partial Fisher-Yates: the first subsample_size entries are a uniform draw.
    std::vector<Eigen::Index> pool = all;
    for (int i = 0; i < model.subsample_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
    }
    pool.resize(static_cast<std::size_t>(model.subsample_size));
    TreeBuilder builder(samples, depth_limit, rng);
    model.trees.push_back(builder.build(std::move(pool)));
  }

  Eigen::VectorXd scores = if_score_batch(model, samples);
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());
  const auto flagged = static_cast<std::size_t>(std::floor(cfg.contamination * static_cast<double>(n)));
  model.score_threshold = sorted[sorted.size() - flagged - 1];

  model.metadata["method"] = "if";
  model.metadata["seed"] = std::to_string(rng_seed);
  model.metadata["trees"] = std::to_string(cfg.tree_count);
  model.metadata["created_by"] = "trajnorm-1";
  return model;
}

double if_score(const IsolationForestModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& sample) {
  if (sample.size() != model.features) {
    throw Error("if_score: sample has " + std::to_string(sample.size()) + " features, model expects " +
                std::to_string(model.features));
  }
  double total = 0.0;
  for (const auto& t : model.trees) total += t.path_length(sample);
  const double mean = total / static_cast<double>(model.trees.size());
  return std::exp2(-mean / average_path_length(model.subsample_size));
}

Eigen::VectorXd if_score_batch(const IsolationForestModel& model, const Eigen::MatrixXd& samples) {
  Eigen::VectorXd out(samples.rows());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) out(i) = if_score(model, samples.row(i));
  return out;
}

Decision if_classify(const IsolationForestModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& sample) {
  return if_classify_score(if_score(model, sample), model.score_threshold);
}

Detections if_detect_batch(const IsolationForestModel& model, const Eigen::MatrixXd& samples) {
  Detections d;
  d.threshold = model.score_threshold;
  d.scores = if_score_batch(model, samples);
  for (Eigen::Index i = 0; i < d.scores.size(); ++i) {
    d.decisions.push_back(if_classify_score(d.scores(i), model.score_threshold));
  }
  return d;
}

// Forest file: header, then each tree as pre-order node tokens
// ("s <feature> <split>" for a split, "l <size>" for a leaf).

std::string format_forest(const IsolationForestModel& model) {
  model.validate();
  std::string out(kForestMagic);
  out += " v" + std::to_string(kForestVersion) + "\n";
  out += "features " + std::to_string(model.features) + "\n";
  out += "subsample " + std::to_string(model.subsample_size) + "\n";
  out += "contamination " + format_exact(model.contamination) + "\n";
  out += "threshold " + format_exact(model.score_threshold) + "\n";
  out += "trees " + std::to_string(model.trees.size()) + "\n";
  for (const auto& t : model.trees) {
    out += "tree " + std::to_string(t.nodes.size()) + "\n";
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        out += "l " + std::to_string(n.size) + "\n";
      } else {
        out += "s " + std::to_string(n.feature) + " " + format_exact(n.split) + "\n";
      }
    }
  }
  for (const auto& [k, v] : model.metadata) out += "meta " + k + " " + v + "\n";
  out += "end\n";
  return out;
}

namespace {

int read_subtree(TokenReader& in, IsolationTree& tree, std::size_t limit) {
  if (tree.nodes.size() >= limit) in.fail("tree has more nodes than declared");
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const auto kind = in.next("node kind");
  if (kind == "l") {
    const auto size = in.integer("leaf size");
    if (size < 0) in.fail("negative leaf size");
    tree.nodes[static_cast<std::size_t>(index)].size = static_cast<int>(size);
    return index;
  }
  if (kind != "s") in.fail("expected node kind 'l' or 's', found '" + std::string(kind) + "'");
  const auto feature = in.integer("split feature");
  const double split = in.real("split value");
  const int l = read_subtree(in, tree, limit);
  const int r = read_subtree(in, tree, limit);
  auto& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = static_cast<int>(feature);
  node.split = split;
  node.left = l;
  node.right = r;
  return index;
}

}  // namespace

IsolationForestModel parse_forest(std::string_view text) {
  TokenReader in(text, "<forest>");
  const auto magic = in.next("magic string");
  if (magic != kForestMagic) in.fail("not a trajnorm isolation-forest file (bad magic '" + std::string(magic) + "')");
  const auto version = in.next("version");
  if (version != "v" + std::to_string(kForestVersion)) {
    in.fail("unsupported forest version '" + std::string(version) + "'");
  }
  IsolationForestModel model;
  in.expect("features");
  model.features = static_cast<int>(in.integer("feature count"));
  in.expect("subsample");
  model.subsample_size = static_cast<int>(in.integer("subsample size"));
  in.expect("contamination");
  model.contamination = in.real("contamination");
  in.expect("threshold");
  model.score_threshold = in.real("threshold");
  in.expect("trees");
  const auto tree_count = in.integer("tree count");
  if (tree_count < 1 || tree_count > 1'000'000) in.fail("implausible tree count");
  for (long long t = 0; t < tree_count; ++t) {
    in.expect("tree");
    const auto node_count = in.integer("node count");
    if (node_count < 1) in.fail("tree must have at least one node");
    IsolationTree tree;
    read_subtree(in, tree, static_cast<std::size_t>(node_count));
    if (tree.nodes.size() != static_cast<std::size_t>(node_count)) in.fail("tree node count mismatch");
    model.trees.push_back(std::move(tree));
  }
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
    throw Error(std::string("invalid forest file: ") + e.what());
  }
  return model;
}

void save_forest(const IsolationForestModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, format_forest(model));
}

IsolationForestModel load_forest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_forest(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

DetectorTraining vae_detector(const Corpus& normal, const DetectorTrainConfig& cfg, int hidden) {
  return train_autoencoder_detector(
      normal, [hidden](int input, std::uint64_t seed) { return build_vae<double>(input, hidden, seed); }, cfg,
      "vae");
}

}  // namespace trajnorm
