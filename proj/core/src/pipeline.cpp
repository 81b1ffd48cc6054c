#include "attnfuse/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"
#include "attnfuse/folds.hpp"
#include "attnfuse/random.hpp"
#include "attnfuse/stats.hpp"

namespace attnfuse {

namespace {

constexpr const char* kMetricNames[] = {"precision", "specificity", "accuracy", "sensitivity",
                                        "mcc",       "f1",          "auc"};

double metric_value(const FoldMetrics& fold, const std::string& name) {
  const auto& m = fold.metrics;
  if (name == "precision") return m.precision;
  if (name == "specificity") return m.specificity;
  if (name == "accuracy") return m.accuracy;
  if (name == "sensitivity") return m.sensitivity;
  if (name == "mcc") return m.mcc;
  if (name == "f1") return m.f1;
  return fold.auc;
}

MetricsReport summarize(const PredictionMatrix& preds, std::span<const FusionTrace> traces,
                        std::span<const int> folds, int k_folds,
                        const std::vector<GroupingPlan>& plans) {
  MetricsReport report;
  std::vector<int> predicted, truth;
  std::vector<double> scores;
  std::size_t dowa_count = 0;
  for (const auto& t : traces) {
    predicted.push_back(t.meta.predicted);
    truth.push_back(t.true_class);
    scores.push_back(t.meta.score);
    if (t.selected.source == FusionSource::dowa) ++dowa_count;
  }
  report.pooled_counts = confusion_from(predicted, truth);
  report.pooled = compute_metrics(report.pooled_counts);
  report.roc = roc_curve(scores, truth);
  report.dowa_fraction = static_cast<double>(dowa_count) / static_cast<double>(traces.size());
  report.iowa_fraction = 1.0 - report.dowa_fraction;

  for (int f = 0; f < k_folds; ++f) {
    std::vector<int> fp, ft;
    std::vector<double> fs;
    std::size_t fold_dowa = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (folds[i] != f) continue;
      fp.push_back(traces[i].meta.predicted);
      ft.push_back(traces[i].true_class);
      fs.push_back(traces[i].meta.score);
      if (traces[i].selected.source == FusionSource::dowa) ++fold_dowa;
    }
    FoldMetrics fold;
    fold.fold = f;
    fold.counts = confusion_from(fp, ft);
    fold.metrics = compute_metrics(fold.counts);
    fold.auc = roc_curve(fs, ft).auc;
    fold.dowa_fraction = static_cast<double>(fold_dowa) / static_cast<double>(fp.size());
    fold.dowa_group = plans[static_cast<std::size_t>(f)].dowa_names();
    fold.iowa_group = plans[static_cast<std::size_t>(f)].iowa_names();
    report.per_fold.push_back(std::move(fold));
  }

  for (const char* name : kMetricNames) {
    std::vector<double> values;
    for (const auto& fold : report.per_fold) values.push_back(metric_value(fold, name));
    report.summary[name] = {mean(values), sample_std(values)};
  }
  for (std::size_t l = 0; l < preds.learner_count(); ++l) {
    report.first_layer_accuracy.emplace_back(preds.learners[l], learner_accuracy(preds, l));
  }
  return report;
}

}  // namespace

StageSeeds stage_seeds(std::uint64_t master_seed) {
  return {mix_seed(master_seed, 1), mix_seed(master_seed, 2), mix_seed(master_seed, 3),
          mix_seed(master_seed, 4), mix_seed(master_seed, 5)};
}

std::vector<ClassifierSpec> resolved_learners(const RunConfig& config) {
  if (!config.learners.empty()) return config.learners;
  return default_roster(stage_seeds(config.seed).learners);
}

FusionEvaluation evaluate_fusion_cv(const PredictionMatrix& preds, const FusionOptions& options,
                                    int k_folds, std::uint64_t seed) {
  preds.validate();
  FusionEvaluation eval;
  eval.folds = stratified_folds(preds.labels, k_folds, seed);
  eval.traces.resize(preds.size());

  std::vector<GroupingPlan> plans;
  for (int f = 0; f < k_folds; ++f) {
    const auto split = split_for_fold(eval.folds, f);
    auto fold_options = options;
    fold_options.iowa.seed = mix_seed(options.iowa.seed, static_cast<std::uint64_t>(f));
    const auto stack = fit_fusion_stack(preds, fold_options, split.train);
    const auto traces = apply_fusion_stack(stack, preds, split.test);
    for (std::size_t t = 0; t < split.test.size(); ++t) eval.traces[split.test[t]] = traces[t];
    eval.provenance.push_back({"fusion", "grouping+iowa+ridge", f, split.train});
    plans.push_back(stack.plan);
  }
  eval.metrics = summarize(preds, eval.traces, eval.folds, k_folds, plans);
  return eval;
}

std::vector<std::string> find_experiment_leakage(const ExperimentResult& result) {
  auto problems = find_leakage(result.first_layer.predictions.folds, result.first_layer.provenance);
  const auto fusion = find_leakage(result.fusion.folds, result.fusion.provenance);
  problems.insert(problems.end(), fusion.begin(), fusion.end());
  return problems;
}

ExperimentResult run_experiment(const RunConfig& config, const Dataset& data) {
  if (config.folds < 2) throw ConfigError("fold count must be at least 2");
  data.validate();
  require_both_classes(data.labels, "experiment");
  const auto seeds = stage_seeds(config.seed);

  ExperimentResult result;
  auto forest = config.forest;
  forest.seed = seeds.screening;
  result.screening = screen(data, forest, config.screening_threshold);
  if (result.screening.retained.empty()) {
    throw DataError(DataIssue::dimension, "screening retained no features");
  }
  const auto screened = data.select_features(std::span<const std::string>(result.screening.retained));

  result.learners = resolved_learners(config);
  result.first_layer =
      fit_predict_out_of_fold(result.learners, screened, config.folds, seeds.first_layer_folds);

  FusionOptions options;
  options.iowa = config.iowa;
  options.iowa.seed = seeds.iowa;
  options.ridge_lambda = config.ridge_lambda;
  options.groups = config.groups;
  result.fusion =
      evaluate_fusion_cv(result.first_layer.predictions, options, config.folds, seeds.fusion_folds);
  result.final_stack = fit_fusion_stack(result.first_layer.predictions, options);

  const auto leaks = find_experiment_leakage(result);
  if (!leaks.empty()) throw std::logic_error("leakage detected: " + leaks.front());
  return result;
}

ExperimentResult run_experiment(const RunConfig& config) {
  CsvSchema schema;
  schema.label_column = config.label_column;
  return run_experiment(config, read_dataset_csv(config.data_path, schema));
}

}  // namespace attnfuse
