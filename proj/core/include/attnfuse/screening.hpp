#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "attnfuse/dataset.hpp"
#include "attnfuse/tree.hpp"

namespace attnfuse {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 10;
  int min_samples_split = 5;
  /// 0 selects ceil(sqrt(d)).
  int features_per_split = 0;
  std::uint64_t seed = 0;
};

/// Bootstrap forest used for predictor screening. Immutable once fitted.
class BootstrapForest {
 public:
  BootstrapForest(std::vector<std::string> feature_names, std::vector<ClassificationTree> trees)
      : feature_names_(std::move(feature_names)), trees_(std::move(trees)) {}

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<ClassificationTree>& trees() const noexcept { return trees_; }

  /// Mean class-1 leaf fraction across trees.
  double predict(std::span<const double> row) const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<ClassificationTree> trees_;
};

struct FeatureContribution {
  std::string name;
  double percent = 0.0;
};

struct ScreeningReport {
  /// In dataset column order.
  std::vector<FeatureContribution> contributions;
  /// Features at or above the threshold, in dataset column order.
  std::vector<std::string> retained;
  double threshold_percent = 0.0;
};

/// Each tree sees N rows drawn with replacement and, at every node, the best
/// Gini split among features_per_split randomly chosen features. Tree t is
/// seeded from (seed, t), so the result does not depend on thread count.
/// Throws DataError for fewer than two rows or a single class.
BootstrapForest fit_bootstrap_forest(const Dataset& data, const ForestConfig& config);

/// Impurity-decrease importance summed over all trees, as percentages that
/// add to 100. retained is left empty. Throws NumericError if the forest
/// never split.
ScreeningReport feature_contributions(const BootstrapForest& forest);

/// Fits, scores and keeps features whose contribution is >= threshold_percent.
ScreeningReport screen(const Dataset& data, const ForestConfig& config, double threshold_percent);

/// Marks retained features for a report whose contributions are filled.
void apply_threshold(ScreeningReport& report, double threshold_percent);

/// name,contribution_percent rows sorted by descending contribution.
void write_contributions_csv(std::ostream& out, const ScreeningReport& report);

}  // namespace attnfuse
