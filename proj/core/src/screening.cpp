#include "attnfuse/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"
#include "attnfuse/parallel.hpp"

namespace attnfuse {

double BootstrapForest::predict(std::span<const double> row) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += tree.predict(row);
  return trees_.empty() ? 0.5 : total / static_cast<double>(trees_.size());
}

BootstrapForest fit_bootstrap_forest(const Dataset& data, const ForestConfig& config) {
  if (config.n_trees < 1) throw ConfigError("forest needs at least one tree");
  if (config.max_depth < 1) throw ConfigError("forest max_depth must be at least 1");
  if (data.size() < 2) {
    throw DataError(DataIssue::empty_input, "screening needs at least two rows");
  }
  data.validate();
  require_both_classes(data.labels, "screening");

  TreeOptions options;
  options.max_depth = config.max_depth;
  options.min_samples_split = config.min_samples_split;
  options.features_per_split =
      config.features_per_split > 0
          ? config.features_per_split
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.dims()))));
  options.mode = SplitMode::best;

  const std::size_t n = data.size();
  std::vector<ClassificationTree> trees(static_cast<std::size_t>(config.n_trees));
  parallel_for(trees.size(), [&](std::size_t t) {
    Rng rng(mix_seed(config.seed, t));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    trees[t] = ClassificationTree::fit(data.features, data.labels, rows, {}, options, rng);
  });
  return BootstrapForest(data.feature_names, std::move(trees));
}

ScreeningReport feature_contributions(const BootstrapForest& forest) {
  std::vector<double> importance(forest.feature_names().size(), 0.0);
  for (const auto& tree : forest.trees()) tree.accumulate_importance(importance);
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (!(total > 0.0)) throw NumericError("forest made no splits; contributions are undefined");

  ScreeningReport report;
  for (std::size_t f = 0; f < importance.size(); ++f) {
    report.contributions.push_back({forest.feature_names()[f], 100.0 * importance[f] / total});
  }
  return report;
}

void apply_threshold(ScreeningReport& report, double threshold_percent) {
  if (!(threshold_percent >= 0.0 && threshold_percent <= 100.0)) {
    throw ConfigError("screening threshold must lie in [0, 100] percent");
  }
  report.threshold_percent = threshold_percent;
  report.retained.clear();
  for (const auto& c : report.contributions) {
    if (c.percent >= threshold_percent) report.retained.push_back(c.name);
  }
}

ScreeningReport screen(const Dataset& data, const ForestConfig& config, double threshold_percent) {
  if (!(threshold_percent >= 0.0 && threshold_percent <= 100.0)) {
    throw ConfigError("screening threshold must lie in [0, 100] percent");
  }
  auto report = feature_contributions(fit_bootstrap_forest(data, config));
  apply_threshold(report, threshold_percent);
  return report;
}

void write_contributions_csv(std::ostream& out, const ScreeningReport& report) {
  auto sorted = report.contributions;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.percent > b.percent; });
  out << "name,contribution_percent\n";
  for (const auto& c : sorted) out << c.name << ',' << format_double(c.percent) << '\n';
}

}  // namespace attnfuse
