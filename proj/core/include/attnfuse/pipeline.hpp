#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attnfuse/dataset.hpp"
#include "attnfuse/ensemble.hpp"
#include "attnfuse/learners.hpp"
#include "attnfuse/metrics.hpp"
#include "attnfuse/owa.hpp"
#include "attnfuse/predictions.hpp"
#include "attnfuse/screening.hpp"

namespace attnfuse {

struct RunConfig {
  std::string data_path;
  std::string label_column = "Class";
  double screening_threshold = 0.5;
  int folds = 10;
  std::uint64_t seed = 0;
  ForestConfig forest;
  /// Empty selects the default six-learner roster seeded from seed.
  std::vector<ClassifierSpec> learners;
  owa::IowaTrainOptions iowa;
  double ridge_lambda = 1.0;
  std::optional<GroupOverride> groups;
};

/// Child seeds of the master seed. Each stage draws from its own stream.
struct StageSeeds {
  std::uint64_t screening;
  std::uint64_t first_layer_folds;
  std::uint64_t fusion_folds;
  std::uint64_t iowa;
  std::uint64_t learners;
};
StageSeeds stage_seeds(std::uint64_t master_seed);

/// Learner specs actually used: the configured list or the default roster.
std::vector<ClassifierSpec> resolved_learners(const RunConfig& config);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over folds
};

struct FoldMetrics {
  int fold = 0;
  ConfusionCounts counts;
  ScalarMetrics metrics;
  double auc = 0.0;
  double dowa_fraction = 0.0;
  std::vector<std::string> dowa_group;
  std::vector<std::string> iowa_group;
};

struct MetricsReport {
  ConfusionCounts pooled_counts;
  ScalarMetrics pooled;
  RocCurve roc;
  std::vector<FoldMetrics> per_fold;
  /// precision, specificity, accuracy, sensitivity, mcc, f1 and auc.
  std::map<std::string, MetricSummary> summary;
  /// First-layer out-of-fold accuracy per learner, in learner order.
  std::vector<std::pair<std::string, double>> first_layer_accuracy;
  double dowa_fraction = 0.0;
  double iowa_fraction = 0.0;
};

/// Output of the cross-validated fusion stage on a fixed prediction matrix.
struct FusionEvaluation {
  std::vector<int> folds;
  /// Held-out traces, sorted by row of the prediction matrix.
  std::vector<FusionTrace> traces;
  std::vector<FoldProvenance> provenance;
  MetricsReport metrics;
};

/// k-fold stratified CV over the prediction matrix. In every fold the
/// grouping, both IOWA models and the ridge model see the training folds
/// only, then score the held-out fold.
FusionEvaluation evaluate_fusion_cv(const PredictionMatrix& preds, const FusionOptions& options,
                                    int k_folds, std::uint64_t seed);

struct ExperimentResult {
  ScreeningReport screening;
  std::vector<ClassifierSpec> learners;
  OutOfFoldResult first_layer;
  FusionEvaluation fusion;
  /// Fusion stack refitted on every row; saved in the ensemble artifact.
  FusionStack final_stack;
};

/// Screening on the full data, out-of-fold first-layer probabilities on the
/// retained features, then cross-validated fusion. Deterministic in the
/// master seed. Throws std::logic_error if a provenance check finds leakage.
ExperimentResult run_experiment(const RunConfig& config, const Dataset& data);
ExperimentResult run_experiment(const RunConfig& config);

/// Leakage findings across both cross-validation levels; empty when clean.
std::vector<std::string> find_experiment_leakage(const ExperimentResult& result);

}  // namespace attnfuse
