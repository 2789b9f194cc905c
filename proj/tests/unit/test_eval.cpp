#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "trajnorm/eval.hpp"
#include "trajnorm/text_io.hpp"

using namespace trajnorm;

namespace {

std::vector<Decision> decisions(std::size_t normal, std::size_t abnormal) {
  std::vector<Decision> d(normal, Decision::normal);
  d.insert(d.end(), abnormal, Decision::abnormal);
  return d;
}

RunMetrics metric(Method m, Status s, double tpr, double fpr, int iteration) {
  RunMetrics r;
  r.method = m;
  r.dataset = "synthetic";
  r.status = s;
  r.size = 10;
  r.tpr = tpr;
  r.fpr = fpr;
  r.iteration = iteration;
  return r;
}

Corpus blob(std::mt19937_64& rng, Eigen::Index rows, double center, double spread) {
  std::normal_distribution<double> g(center, spread);
  Corpus c(rows, kPackedWidth);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = g(rng);
  c.col(0).setZero();
  return c;
}

EvalSettings fast_settings() {
  EvalSettings s;
  s.detector.train.epochs = 3;
  s.detector.train.batch_size = 32;
  s.iforest.tree_count = 20;
  return s;
}

}  // namespace

TEST(Counts, PartitionThePopulation) {
  const auto c = count_decisions(decisions(7, 3), decisions(4, 6));
  EXPECT_EQ(c.tn, 7u);
  EXPECT_EQ(c.fp, 3u);
  EXPECT_EQ(c.fn, 4u);
  EXPECT_EQ(c.tp, 6u);
  EXPECT_EQ(c.total(), 20u);
  EXPECT_EQ(c.selection_score(), 6);
}

TEST(Rates, PerfectAndAllNormalDetectors) {
  const auto perfect = rows_from_counts(count_decisions(decisions(10, 0), decisions(0, 5)), Method::dae, "d", 0, 1);
  EXPECT_EQ(perfect[0].status, Status::normal);
  EXPECT_EQ(perfect[0].tpr, 100);
  EXPECT_EQ(perfect[0].fpr, 0);
  EXPECT_EQ(perfect[1].tpr, 100);
  EXPECT_EQ(perfect[1].fpr, 0);
  EXPECT_EQ(perfect[0].size, 10u);
  EXPECT_EQ(perfect[1].size, 5u);

  const auto lazy = rows_from_counts(count_decisions(decisions(10, 0), decisions(5, 0)), Method::dae, "d", 0, 1);
  EXPECT_EQ(lazy[0].tpr, 100);
  EXPECT_EQ(lazy[1].tpr, 0);
}

TEST(Rates, ConsistencyIdentities) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    ConfusionCounts c{rng() % 50 + 1, rng() % 50 + 1, rng() % 50, rng() % 50};
    const auto rows = rows_from_counts(c, Method::vae, "d", 0, 0);
    EXPECT_NEAR(rows[1].tpr, 100 - rows[0].fpr, 1e-9);
    EXPECT_NEAR(rows[0].tpr, 100 - rows[1].fpr, 1e-9);
    for (const auto& r : rows) {
      EXPECT_GE(r.tpr, 0);
      EXPECT_LE(r.tpr, 100);
    }
  }
}

TEST(Aggregate, SingleRunEqualsItself) {
  const auto agg = aggregate({metric(Method::dae, Status::normal, 97.5, 12.25, 0)});
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_EQ(agg[0].tpr_mean, 97.5);
  EXPECT_EQ(agg[0].fpr_mean, 12.25);
  EXPECT_EQ(agg[0].tpr_std, 0);
  EXPECT_EQ(agg[0].runs, 1u);
}

TEST(Aggregate, PermutationInvariantAndBounded) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<RunMetrics> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back(metric(Method::dae, Status::normal, u(rng), u(rng), i));
    rows.push_back(metric(Method::dae, Status::abnormal, u(rng), u(rng), i));
    rows.push_back(metric(Method::iforest, Status::normal, u(rng), u(rng), i));
  }
  const auto base = aggregate(rows);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto again = aggregate(rows);
    ASSERT_EQ(again.size(), base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      EXPECT_EQ(again[k].tpr_mean, base[k].tpr_mean);
      EXPECT_EQ(again[k].fpr_std, base[k].fpr_std);
    }
  }
  for (const auto& a : base) {
    EXPECT_GE(a.tpr_mean, a.tpr_min);
    EXPECT_LE(a.tpr_mean, a.tpr_max);
  }
}

TEST(Report, ColumnsAndRounding) {
  std::vector<RunMetrics> rows;
  for (auto m : {Method::dae, Method::vae, Method::iforest}) {
    rows.push_back(metric(m, Status::normal, 84.6, 15.4, 0));
    rows.push_back(metric(m, Status::abnormal, 84.5, 0.49, 0));
  }
  const auto text = format_report(aggregate(rows), {42, 1, "abc"});
  std::vector<std::string> table;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line[0] != '#') table.emplace_back(line);
  }
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0], "Data,Status,Size,DAE_TPR,DAE_FPR,VAE_TPR,VAE_FPR,IF_TPR,IF_FPR");
  for (const auto& line : table) EXPECT_EQ(split(line, ',').size(), 9u);
  EXPECT_EQ(table[1], "synthetic,normal,10,85,15,85,15,85,15");
  EXPECT_EQ(table[2], "synthetic,abnormal,10,85,0,85,0,85,0");
  EXPECT_NE(text.find("OC-SVM"), std::string::npos);
  EXPECT_NE(text.find("base_seed=42"), std::string::npos);
  EXPECT_EQ(format_report(aggregate(rows), {42, 1, "abc"}), text);
}

TEST(Report, RoundHalfUp) {
  EXPECT_EQ(round_half_up(84.6), 85);
  EXPECT_EQ(round_half_up(84.5), 85);
  EXPECT_EQ(round_half_up(84.49), 84);
  EXPECT_EQ(round_half_up(0.0), 0);
  EXPECT_EQ(round_half_up(100.0), 100);
}

TEST(Report, EmptyMetricsAndUnwritablePathFail) {
  EXPECT_THROW(format_report({}, {}), Error);
  const auto rows = aggregate({metric(Method::dae, Status::normal, 1, 2, 0)});
  EXPECT_THROW(emit_report(rows, {}, "/nonexistent/dir/report.csv"), Error);
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {Method::dae, Method::vae, Method::iforest}) EXPECT_EQ(parse_method(method_key(m)), m);
  EXPECT_EQ(method_label(Method::iforest), "IF");
  EXPECT_THROW(parse_method("svm"), Error);
}

TEST(Evaluate, SeparableDataIsDetectedByEveryMethod) {
  std::mt19937_64 rng(3);
  const auto normal = blob(rng, 200, 0, 1);
  const auto abnormal = blob(rng, 40, 30, 1);
  for (auto m : {Method::dae, Method::vae, Method::iforest}) {
    const auto run = evaluate_once(m, normal, abnormal, 9, fast_settings());
    EXPECT_EQ(run.counts.normals(), 40u);
    EXPECT_EQ(run.counts.abnormals(), 40u);
    EXPECT_EQ(run.counts.tp, 40u) << method_label(m);
    ASSERT_EQ(run.rows.size(), 2u);
    EXPECT_EQ(run.rows[1].size, 40u);
  }
  EXPECT_THROW(evaluate_once(Method::dae, normal, Corpus(0, kPackedWidth), 1, fast_settings()), Error);
}

TEST(Evaluate, RepeatedRunsAreReproducibleAndSelectTheBest) {
  std::mt19937_64 rng(4);
  const auto normal = blob(rng, 100, 0, 1);
  const auto abnormal = blob(rng, 20, 2, 1);
  const auto a = repeated_eval(Method::iforest, normal, abnormal, 4, 77, fast_settings());
  const auto b = repeated_eval(Method::iforest, normal, abnormal, 4, 77, fast_settings());
  ASSERT_EQ(a.runs.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.runs[i].counts.tp, b.runs[i].counts.tp);
    EXPECT_GE(a.runs[a.best_run].counts.selection_score(), a.runs[i].counts.selection_score());
  }
  for (std::size_t i = 0; i < a.best_run; ++i) {
    EXPECT_LT(a.runs[i].counts.selection_score(), a.runs[a.best_run].counts.selection_score());
  }
  EXPECT_EQ(a.summary.size(), 2u);
  EXPECT_EQ(a.summary[0].tpr_mean, b.summary[0].tpr_mean);
  EXPECT_NE(a.runs[0].seed, a.runs[1].seed);

  const auto single = repeated_eval(Method::iforest, normal, abnormal, 1, 77, fast_settings());
  EXPECT_EQ(single.summary[0].tpr_mean, single.runs[0].rows[0].tpr);
}

TEST(Evaluate, TrainedModelsPersistThroughTheVariant) {
  std::mt19937_64 rng(5);
  const auto normal = blob(rng, 60, 0, 1);
  const auto abnormal = blob(rng, 10, 5, 1);
  const auto dir = std::filesystem::temp_directory_path();
  for (auto m : {Method::dae, Method::iforest}) {
    const auto run = evaluate_once(m, normal, abnormal, 2, fast_settings());
    const auto path = dir / ("trajnorm_eval_model_" + std::string(method_key(m)));
    save_trained_model(run.model, path);
    const auto back = load_trained_model(path);
    EXPECT_EQ(back.index(), run.model.index());
    EXPECT_TRUE(detect_with(back, abnormal).scores == detect_with(run.model, abnormal).scores);
  }
}
