#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"
#include "attnfuse/screening.hpp"
#include "attnfuse/tree.hpp"

using namespace attnfuse;

namespace {

// Feature 0 decides the label (> 0 means class 1); the rest are noise.
Dataset separable_on_first(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  for (std::size_t f = 0; f < d; ++f) data.feature_names.push_back("F" + std::to_string(f));
  data.features = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < d; ++f) data.features(r, f) = rng.normal();
    data.labels.push_back(data.features(r, 0) > 0.0 ? 1 : 0);
  }
  return data;
}

double total_percent(const ScreeningReport& r) {
  double s = 0.0;
  for (const auto& c : r.contributions) s += c.percent;
  return s;
}

}  // namespace

TEST(Tree, FitsSeparableData) {
  const auto data = separable_on_first(200, 3, 1);
  std::vector<std::size_t> rows(200);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(0);
  const auto tree = ClassificationTree::fit(data.features, data.labels, rows, {}, TreeOptions{}, rng);
  EXPECT_EQ(tree.nodes().front().feature, 0);
  for (std::size_t r = 0; r < 200; ++r) {
    EXPECT_EQ(tree.predict(data.features.row(r)) >= 0.5 ? 1 : 0, data.labels[r]);
  }
  std::vector<double> imp(3, 0.0);
  tree.accumulate_importance(imp);
  const double p = static_cast<double>(data.count_positive()) / 200.0;
  EXPECT_NEAR(imp[0], 2.0 * p * (1.0 - p), 1e-12);
  EXPECT_EQ(imp[1], 0.0);
}

TEST(Tree, RespectsDepthAndWeights) {
  const auto data = separable_on_first(100, 2, 2);
  std::vector<std::size_t> rows(100);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TreeOptions opts;
  opts.max_depth = 1;
  Rng rng(0);
  const auto stump = ClassificationTree::fit(data.features, data.labels, rows, {}, opts, rng);
  EXPECT_EQ(stump.nodes().size(), 3u);
  EXPECT_DOUBLE_EQ(stump.nodes().front().weight, 100.0);

  std::vector<double> weights(100, 2.0);
  Rng rng2(0);
  const auto weighted = ClassificationTree::fit(data.features, data.labels, rows, weights, opts, rng2);
  EXPECT_DOUBLE_EQ(weighted.nodes().front().weight, 200.0);
}

TEST(Tree, RegressionTreeNewtonLeaves) {
  Matrix x(4, 1);
  for (std::size_t r = 0; r < 4; ++r) x(r, 0) = static_cast<double>(r);
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const auto sorted = presort_columns(x, rows);
  const std::vector<double> targets{1.0, 1.0, -2.0, -2.0};
  const std::vector<double> hess{0.5, 0.5, 1.0, 1.0};
  const auto tree = RegressionTree::fit(x, sorted, targets, hess, 2, 2);
  EXPECT_NEAR(tree.predict(std::vector{0.0}), 2.0, 1e-12);
  EXPECT_NEAR(tree.predict(std::vector{3.0}), -2.0, 1e-12);
}

TEST(Forest, RootSplitsOnDecisiveFeature) {
  const auto data = separable_on_first(300, 5, 3);
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.features_per_split = 5;
  const auto forest = fit_bootstrap_forest(data, cfg);
  for (const auto& tree : forest.trees()) EXPECT_EQ(tree.nodes().front().feature, 0);
  const auto report = feature_contributions(forest);
  EXPECT_GT(report.contributions[0].percent, 50.0);
  EXPECT_NEAR(total_percent(report), 100.0, 1e-6);
}

TEST(Forest, Deterministic) {
  const auto data = separable_on_first(150, 4, 4);
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.features_per_split = 4;
  cfg.seed = 77;
  const auto a = fit_bootstrap_forest(data, cfg);
  const auto b = fit_bootstrap_forest(data, cfg);
  ASSERT_EQ(a.trees()[0].nodes().size(), b.trees()[0].nodes().size());
  for (std::size_t i = 0; i < a.trees()[0].nodes().size(); ++i) {
    EXPECT_EQ(a.trees()[0].nodes()[i].feature, b.trees()[0].nodes()[i].feature);
    EXPECT_EQ(a.trees()[0].nodes()[i].threshold, b.trees()[0].nodes()[i].threshold);
  }
  cfg.n_trees = 30;
  cfg.features_per_split = 0;
  const auto ra = screen(data, cfg, 0.5);
  const auto rb = screen(data, cfg, 0.5);
  for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(ra.contributions[f].percent, rb.contributions[f].percent);
  EXPECT_EQ(ra.retained, rb.retained);
}

TEST(Forest, Preconditions) {
  auto data = separable_on_first(1, 2, 5);
  EXPECT_THROW(fit_bootstrap_forest(data, ForestConfig{}), DataError);
  data = separable_on_first(10, 2, 5);
  std::fill(data.labels.begin(), data.labels.end(), 1);
  EXPECT_THROW(fit_bootstrap_forest(data, ForestConfig{}), DataError);
}

TEST(Forest, SingleContributorGetsEverything) {
  // Only feature 0 varies, so it is the only feature that can ever split.
  auto data = separable_on_first(100, 3, 6);
  for (std::size_t r = 0; r < data.size(); ++r) {
    data.features(r, 1) = 1.0;
    data.features(r, 2) = -4.0;
  }
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto report = feature_contributions(fit_bootstrap_forest(data, cfg));
  EXPECT_DOUBLE_EQ(report.contributions[0].percent, 100.0);
  EXPECT_EQ(report.contributions[1].percent, 0.0);
}

TEST(Forest, NoSplitIsNumericError) {
  Dataset data;
  data.feature_names = {"a"};
  data.features = Matrix(6, 1, 3.0);
  data.labels = {0, 1, 0, 1, 0, 1};
  EXPECT_THROW(feature_contributions(fit_bootstrap_forest(data, ForestConfig{})), NumericError);
}

TEST(Screening, ThresholdBehaviour) {
  SynthConfig sc;
  sc.n_samples = 400;
  sc.n_informative = 2;
  sc.n_noise = 4;
  const auto data = make_synthetic(sc);
  ForestConfig cfg;
  cfg.n_trees = 30;
  const auto all = screen(data, cfg, 0.0);
  EXPECT_EQ(all.retained.size(), 6u);

  auto report = all;
  std::size_t previous = report.retained.size();
  for (double t : {0.5, 1.0, 5.0, 20.0, 60.0, 100.0}) {
    apply_threshold(report, t);
    EXPECT_LE(report.retained.size(), previous);
    previous = report.retained.size();
  }
  EXPECT_THROW(apply_threshold(report, -1.0), ConfigError);
  EXPECT_THROW(apply_threshold(report, 101.0), ConfigError);
}

TEST(Screening, ColumnPermutationPermutesContributions) {
  const auto data = separable_on_first(200, 5, 8);
  ForestConfig cfg;
  cfg.n_trees = 15;
  cfg.features_per_split = 5;
  cfg.seed = 3;
  const auto base = screen(data, cfg, 0.5);

  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const auto permuted = data.select_features(std::span<const std::size_t>(perm));
  const auto other = screen(permuted, cfg, 0.5);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    EXPECT_EQ(other.contributions[j].name, base.contributions[perm[j]].name);
    EXPECT_NEAR(other.contributions[j].percent, base.contributions[perm[j]].percent, 1e-9);
  }
}

TEST(Screening, InformativeFeaturesRetained) {
  SynthConfig sc;
  sc.n_samples = 1000;
  sc.class_separation = 3.0;
  sc.seed = 21;
  const auto report = screen(make_synthetic(sc), ForestConfig{}, 0.5);
  for (int v = 1; v <= 5; ++v) {
    const auto name = "V" + std::to_string(v);
    EXPECT_NE(std::find(report.retained.begin(), report.retained.end(), name), report.retained.end()) << name;
  }
  EXPECT_NEAR(total_percent(report), 100.0, 1e-6);
}

TEST(Screening, ContributionsCsvSortedDescending) {
  ScreeningReport r;
  r.contributions = {{"a", 10.0}, {"b", 70.0}, {"c", 20.0}};
  std::ostringstream out;
  write_contributions_csv(out, r);
  EXPECT_EQ(out.str(), "name,contribution_percent\nb,70\nc,20\na,10\n");
}
