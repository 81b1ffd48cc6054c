#include "attnfuse/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"

namespace attnfuse {

namespace {

std::vector<std::size_t> resolve_rows(std::span<const std::size_t> rows, std::size_t n) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t index_of(const std::vector<std::string>& learners, const std::string& name) {
  for (std::size_t i = 0; i < learners.size(); ++i) {
    if (lowercase(learners[i]) == lowercase(name)) return i;
  }
  throw ConfigError("grouping names unknown learner '" + name + "'");
}

std::array<double, 3> group_args(const PredictionMatrix& preds, const LearnerTriple& group,
                                 std::size_t row, int cls) {
  return {preds.p(row, group[0], cls), preds.p(row, group[1], cls), preds.p(row, group[2], cls)};
}

}  // namespace

CorrelationMatrix correlation_matrix(const PredictionMatrix& preds) {
  if (preds.size() < 2) {
    throw DataError(DataIssue::empty_input, "correlation needs at least two samples");
  }
  Matrix class1(preds.size(), preds.learner_count());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t l = 0; l < preds.learner_count(); ++l) class1(i, l) = preds.p(i, l, 1);
  }
  return column_correlations(class1);
}

std::vector<std::string> GroupingPlan::dowa_names() const {
  return {learners[dowa_group[0]], learners[dowa_group[1]], learners[dowa_group[2]]};
}

std::vector<std::string> GroupingPlan::iowa_names() const {
  return {learners[iowa_group[0]], learners[iowa_group[1]], learners[iowa_group[2]]};
}

GroupingPlan plan_grouping(const Matrix& correlations, const std::vector<std::string>& learners,
                           const std::optional<GroupOverride>& override_groups) {
  if (learners.size() != 6) {
    throw ConfigError("grouping needs exactly six first-layer learners, got " +
                      std::to_string(learners.size()));
  }
  if (correlations.rows() != 6 || correlations.cols() != 6) {
    throw DimensionError("grouping needs a 6x6 correlation matrix");
  }
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      if (!std::isfinite(correlations(a, b)) || std::abs(correlations(a, b) - correlations(b, a)) > 1e-9) {
        throw NumericError("correlation matrix is not finite and symmetric");
      }
    }
  }

  GroupingPlan plan;
  plan.learners = learners;
  plan.correlations = correlations;

  auto complement = [](const LearnerTriple& group) {
    LearnerTriple rest{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      if (std::find(group.begin(), group.end(), i) == group.end()) rest[k++] = i;
    }
    return rest;
  };

  if (override_groups) {
    const auto& dowa = override_groups->dowa;
    if (dowa.size() != 3) throw ConfigError("DOWA group override must name exactly three learners");
    LearnerTriple group{};
    for (std::size_t i = 0; i < 3; ++i) group[i] = index_of(learners, dowa[i]);
    if (std::set<std::size_t>(group.begin(), group.end()).size() != 3) {
      throw ConfigError("DOWA group override repeats a learner");
    }
    const auto rest = complement(group);
    if (!override_groups->iowa.empty()) {
      if (override_groups->iowa.size() != 3) {
        throw ConfigError("IOWA group override must name exactly three learners");
      }
      std::set<std::size_t> given;
      for (const auto& name : override_groups->iowa) given.insert(index_of(learners, name));
      if (given != std::set<std::size_t>(rest.begin(), rest.end())) {
        throw ConfigError("group override is not a partition of the six learners");
      }
      LearnerTriple iowa{};
      for (std::size_t i = 0; i < 3; ++i) iowa[i] = index_of(learners, override_groups->iowa[i]);
      plan.iowa_group = iowa;
    } else {
      plan.iowa_group = rest;
    }
    plan.dowa_group = group;
    return plan;
  }

  bool found = false;
  double best_spread = 0.0, best_mean = 0.0;
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = a + 1; b < 6; ++b) {
      for (std::size_t c = b + 1; c < 6; ++c) {
        const double r[3] = {correlations(a, b), correlations(a, c), correlations(b, c)};
        const double spread = std::max({r[0], r[1], r[2]}) - std::min({r[0], r[1], r[2]});
        const double mean = (r[0] + r[1] + r[2]) / 3.0;
        // Enumeration is lexicographic, so keeping the first on full ties
        // realizes the final tie-break.
        if (!found || spread < best_spread || (spread == best_spread && mean > best_mean)) {
          found = true;
          best_spread = spread;
          best_mean = mean;
          plan.dowa_group = {a, b, c};
        }
      }
    }
  }
  plan.iowa_group = complement(plan.dowa_group);
  return plan;
}

GroupOverride parse_group_override(std::string_view dowa_list) {
  GroupOverride out;
  std::size_t start = 0;
  while (start <= dowa_list.size()) {
    const auto comma = dowa_list.find(',', start);
    auto token = dowa_list.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.empty()) throw ConfigError("empty learner name in group override");
    out.dowa.emplace_back(token);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const char* to_string(FusionSource source) noexcept {
  return source == FusionSource::dowa ? "DOWA" : "IOWA";
}

double FusionVector::margin() const noexcept { return std::abs(class0 - class1); }

std::vector<FusionPair> attention_layer(const PredictionMatrix& preds, const GroupingPlan& plan,
                                        const owa::IowaModel& iowa_class0,
                                        const owa::IowaModel& iowa_class1,
                                        std::span<const std::size_t> rows) {
  if (iowa_class0.betas.size() != 3 || iowa_class1.betas.size() != 3) {
    throw DimensionError("attention layer needs IOWA models trained on three arguments");
  }
  const auto selected = resolve_rows(rows, preds.size());
  std::vector<FusionPair> out;
  out.reserve(selected.size());
  for (std::size_t row : selected) {
    FusionPair pair;
    pair.dowa.source = FusionSource::dowa;
    pair.iowa.source = FusionSource::iowa;
    const auto d0 = group_args(preds, plan.dowa_group, row, 0);
    const auto d1 = group_args(preds, plan.dowa_group, row, 1);
    pair.dowa.class0 = owa::dowa_aggregate(d0);
    pair.dowa.class1 = owa::dowa_aggregate(d1);
    const auto i0 = group_args(preds, plan.iowa_group, row, 0);
    const auto i1 = group_args(preds, plan.iowa_group, row, 1);
    pair.iowa.class0 = owa::iowa_predict(iowa_class0, i0);
    pair.iowa.class1 = owa::iowa_predict(iowa_class1, i1);
    out.push_back(pair);
  }
  return out;
}

std::pair<std::vector<owa::IowaTrainingSample>, std::vector<owa::IowaTrainingSample>>
iowa_training_targets(const PredictionMatrix& preds, const GroupingPlan& plan,
                      std::span<const std::size_t> rows) {
  const auto selected = resolve_rows(rows, preds.size());
  std::vector<owa::IowaTrainingSample> class0, class1;
  class0.reserve(selected.size());
  class1.reserve(selected.size());
  for (std::size_t row : selected) {
    if (row >= preds.size()) throw DimensionError("IOWA target row out of range");
    const auto a0 = group_args(preds, plan.iowa_group, row, 0);
    const auto a1 = group_args(preds, plan.iowa_group, row, 1);
    const int label = preds.labels[row];
    class0.push_back({{a0.begin(), a0.end()}, label == 0 ? 1.0 : 0.0});
    class1.push_back({{a1.begin(), a1.end()}, label == 1 ? 1.0 : 0.0});
  }
  return {std::move(class0), std::move(class1)};
}

FusionVector select(const FusionVector& f_dowa, const FusionVector& f_iowa) {
  return f_dowa.margin() >= f_iowa.margin() ? f_dowa : f_iowa;
}

RidgeModel ridge_fit(std::span<const FusionFeatures> features, std::span<const int> labels,
                     double ridge_lambda) {
  if (!(ridge_lambda > 0.0) || !std::isfinite(ridge_lambda)) {
    throw ConfigError("ridge lambda must be a positive finite number");
  }
  if (features.size() != labels.size()) throw DimensionError("ridge: features and labels differ in length");
  if (features.size() < 2) throw DataError(DataIssue::empty_input, "ridge needs at least two rows");

  const auto n = static_cast<double>(features.size());
  double mean_x[2] = {0.0, 0.0};
  double mean_y = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      if (!std::isfinite(features[i][j])) {
        throw DataError(DataIssue::non_finite, "ridge: feature at row " + std::to_string(i) + " is not finite");
      }
      mean_x[j] += features[i][j];
    }
    mean_y += labels[i] == 1 ? 1.0 : -1.0;
  }
  mean_x[0] /= n;
  mean_x[1] /= n;
  mean_y /= n;

  double a00 = ridge_lambda, a01 = 0.0, a11 = ridge_lambda, r0 = 0.0, r1 = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double x0 = features[i][0] - mean_x[0];
    const double x1 = features[i][1] - mean_x[1];
    const double y = (labels[i] == 1 ? 1.0 : -1.0) - mean_y;
    a00 += x0 * x0;
    a01 += x0 * x1;
    a11 += x1 * x1;
    r0 += x0 * y;
    r1 += x1 * y;
  }
  const double det = a00 * a11 - a01 * a01;
  RidgeModel model;
  model.ridge_lambda = ridge_lambda;
  model.coefficients = {(a11 * r0 - a01 * r1) / det, (a00 * r1 - a01 * r0) / det};
  model.bias = mean_y - model.coefficients[0] * mean_x[0] - model.coefficients[1] * mean_x[1];
  if (!std::isfinite(model.coefficients[0]) || !std::isfinite(model.coefficients[1]) ||
      !std::isfinite(model.bias)) {
    throw NumericError("ridge solve produced non-finite coefficients");
  }
  return model;
}

MetaPrediction ridge_predict(const RidgeModel& model, const FusionFeatures& features) {
  const double score =
      features[0] * model.coefficients[0] + features[1] * model.coefficients[1] + model.bias;
  return {score >= 0.0 ? 1 : 0, score};
}

std::vector<MetaPrediction> ridge_predict(const RidgeModel& model,
                                          std::span<const FusionFeatures> features) {
  std::vector<MetaPrediction> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(ridge_predict(model, f));
  return out;
}

void RidgeMetaLearner::fit(std::span<const FusionFeatures> features, std::span<const int> labels) {
  model_ = ridge_fit(features, labels, model_.ridge_lambda);
}

MetaPrediction RidgeMetaLearner::predict(const FusionFeatures& features) const {
  return ridge_predict(model_, features);
}

FusionStack fit_fusion_stack(const PredictionMatrix& preds, const FusionOptions& options,
                             std::span<const std::size_t> rows) {
  const auto selected = resolve_rows(rows, preds.size());
  const auto training = preds.subset(selected);
  require_both_classes(training.labels, "fusion stack");

  FusionStack stack;
  stack.plan = plan_grouping(correlation_matrix(training).values, training.learners, options.groups);

  const auto [samples0, samples1] = iowa_training_targets(training, stack.plan);
  auto iowa_options = options.iowa;
  stack.iowa_class0 = owa::iowa_train(samples0, iowa_options);
  iowa_options.seed = mix_seed(options.iowa.seed, 1);
  stack.iowa_class1 = owa::iowa_train(samples1, iowa_options);

  const auto pairs = attention_layer(training, stack.plan, stack.iowa_class0, stack.iowa_class1);
  std::vector<FusionFeatures> features;
  features.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto chosen = select(pair.dowa, pair.iowa);
    features.push_back({chosen.class0, chosen.class1});
  }
  RidgeMetaLearner meta(options.ridge_lambda);
  meta.fit(features, training.labels);
  stack.ridge = meta.model();
  return stack;
}

GroupingPlan rebind_plan(const GroupingPlan& plan, const PredictionMatrix& preds) {
  GroupingPlan out = plan;
  out.learners = preds.learners;
  auto rebind = [&](const LearnerTriple& group) {
    LearnerTriple mapped{};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& name = plan.learners.at(group[i]);
      const auto idx = preds.learner_index(name);
      if (!idx) throw DimensionError("prediction matrix lacks learner '" + name + "'");
      mapped[i] = *idx;
    }
    return mapped;
  };
  out.dowa_group = rebind(plan.dowa_group);
  out.iowa_group = rebind(plan.iowa_group);
  return out;
}

std::vector<FusionTrace> apply_fusion_stack(const FusionStack& stack, const PredictionMatrix& preds,
                                            std::span<const std::size_t> rows) {
  const auto plan = rebind_plan(stack.plan, preds);
  const auto selected = resolve_rows(rows, preds.size());
  const auto pairs = attention_layer(preds, plan, stack.iowa_class0, stack.iowa_class1, selected);
  std::vector<FusionTrace> traces;
  traces.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    FusionTrace trace;
    trace.sample_id = preds.sample_ids[selected[i]];
    trace.pair = pairs[i];
    trace.selected = select(pairs[i].dowa, pairs[i].iowa);
    trace.meta = ridge_predict(stack.ridge, {trace.selected.class0, trace.selected.class1});
    trace.true_class = preds.labels[selected[i]];
    traces.push_back(trace);
  }
  return traces;
}

void write_fusion_trace_csv(std::ostream& out, std::span<const FusionTrace> traces) {
  out << "sample_id,f_dowa_0,f_dowa_1,f_iowa_0,f_iowa_1,source,meta_score,predicted,true\n";
  for (const auto& t : traces) {
    out << t.sample_id << ',' << format_double(t.pair.dowa.class0) << ','
        << format_double(t.pair.dowa.class1) << ',' << format_double(t.pair.iowa.class0) << ','
        << format_double(t.pair.iowa.class1) << ',' << to_string(t.selected.source) << ','
        << format_double(t.meta.score) << ',' << t.meta.predicted << ',' << t.true_class << '\n';
  }
}

}  // namespace attnfuse
