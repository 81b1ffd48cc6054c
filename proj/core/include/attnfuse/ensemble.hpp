#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attnfuse/matrix.hpp"
#include "attnfuse/owa.hpp"
#include "attnfuse/predictions.hpp"
#include "attnfuse/stats.hpp"

namespace attnfuse {

/// Pearson correlation between the learners' class-1 probability columns.
/// Pairs involving a constant column are 0 and the column is reported.
CorrelationMatrix correlation_matrix(const PredictionMatrix& preds);

using LearnerTriple = std::array<std::size_t, 3>;

/// Which three learners feed the dependent (DOWA) aggregator and which
/// three feed the learned (IOWA) aggregator. Indices refer to the
/// prediction matrix's learner order.
struct GroupingPlan {
  std::vector<std::string> learners;
  LearnerTriple dowa_group{};
  LearnerTriple iowa_group{};
  Matrix correlations;

  std::vector<std::string> dowa_names() const;
  std::vector<std::string> iowa_names() const;
};

struct GroupOverride {
  std::vector<std::string> dowa;
  std::vector<std::string> iowa;  // may be empty: the complement is used
};

/// Without an override, picks for DOWA the triple whose three pairwise
/// correlations have the smallest spread (max - min). Ties go to the higher
/// mean correlation, then the lexicographically smallest triple. The other
/// three learners form the IOWA group. Requires exactly six learners.
/// Throws ConfigError when the override is not a 3 + 3 partition.
GroupingPlan plan_grouping(const Matrix& correlations, const std::vector<std::string>& learners,
                           const std::optional<GroupOverride>& override_groups = std::nullopt);

/// Parses "bt,et,ab" style lists; names are matched case-insensitively.
GroupOverride parse_group_override(std::string_view dowa_list);

enum class FusionSource { dowa, iowa };

const char* to_string(FusionSource source) noexcept;

/// Aggregated class scores for one sample. Not renormalized.
struct FusionVector {
  double class0 = 0.0;
  double class1 = 0.0;
  FusionSource source = FusionSource::dowa;

  double margin() const noexcept;
  friend bool operator==(const FusionVector&, const FusionVector&) = default;
};

struct FusionPair {
  FusionVector dowa;
  FusionVector iowa;
};

/// Per sample: DOWA over the DOWA group's class-c probabilities and IOWA
/// (class-c model) over the IOWA group's class-c probabilities, c = 0, 1.
/// rows selects samples; empty means all.
std::vector<FusionPair> attention_layer(const PredictionMatrix& preds, const GroupingPlan& plan,
                                        const owa::IowaModel& iowa_class0,
                                        const owa::IowaModel& iowa_class1,
                                        std::span<const std::size_t> rows = {});

/// One sample per row for each class model: arguments are the IOWA group's
/// class-c probabilities, target is 1 when the row's true class is c.
/// rows selects samples; empty means all.
std::pair<std::vector<owa::IowaTrainingSample>, std::vector<owa::IowaTrainingSample>>
iowa_training_targets(const PredictionMatrix& preds, const GroupingPlan& plan,
                      std::span<const std::size_t> rows = {});

/// Keeps the vector with the larger class-score margin |class0 - class1|;
/// DOWA wins ties.
FusionVector select(const FusionVector& f_dowa, const FusionVector& f_iowa);

using FusionFeatures = std::array<double, 2>;

struct RidgeModel {
  std::array<double, 2> coefficients{};
  double bias = 0.0;
  double ridge_lambda = 1.0;
};

struct MetaPrediction {
  int predicted = 0;
  double score = 0.0;
};

/// Least squares on labels encoded as -1 / +1 with an L2 penalty on the
/// coefficients only (features are centered, the bias is free).
/// Throws ConfigError for lambda <= 0 and DataError for fewer than two rows
/// or non-finite features.
RidgeModel ridge_fit(std::span<const FusionFeatures> features, std::span<const int> labels,
                     double ridge_lambda);

/// Class 1 when the score x . coefficients + bias is >= 0.
MetaPrediction ridge_predict(const RidgeModel& model, const FusionFeatures& features);
std::vector<MetaPrediction> ridge_predict(const RidgeModel& model,
                                          std::span<const FusionFeatures> features);

/// Second-level learner slot. Only the ridge classifier ships.
class MetaLearner {
 public:
  virtual ~MetaLearner() = default;
  virtual void fit(std::span<const FusionFeatures> features, std::span<const int> labels) = 0;
  virtual MetaPrediction predict(const FusionFeatures& features) const = 0;
};

class RidgeMetaLearner final : public MetaLearner {
 public:
  explicit RidgeMetaLearner(double ridge_lambda = 1.0) { model_.ridge_lambda = ridge_lambda; }
  explicit RidgeMetaLearner(RidgeModel model) : model_(model) {}

  void fit(std::span<const FusionFeatures> features, std::span<const int> labels) override;
  MetaPrediction predict(const FusionFeatures& features) const override;
  const RidgeModel& model() const noexcept { return model_; }

 private:
  RidgeModel model_;
};

struct FusionOptions {
  owa::IowaTrainOptions iowa;
  double ridge_lambda = 1.0;
  std::optional<GroupOverride> groups;
};

/// Everything fitted above the first layer: grouping, two IOWA models and
/// the ridge meta-learner.
struct FusionStack {
  GroupingPlan plan;
  owa::IowaModel iowa_class0;
  owa::IowaModel iowa_class1;
  RidgeModel ridge;
};

/// Fits the stack on the given rows only (all rows when empty).
FusionStack fit_fusion_stack(const PredictionMatrix& preds, const FusionOptions& options,
                             std::span<const std::size_t> rows = {});

struct FusionTrace {
  std::size_t sample_id = 0;
  FusionPair pair;
  FusionVector selected;
  MetaPrediction meta;
  int true_class = 0;
};

/// Runs attention, selection and the meta-learner for the given rows (all
/// when empty). The stack's learner names must all appear in preds.
std::vector<FusionTrace> apply_fusion_stack(const FusionStack& stack, const PredictionMatrix& preds,
                                            std::span<const std::size_t> rows = {});

/// Re-binds a plan to another prediction matrix by learner name.
/// Throws DimensionError when a learner is missing.
GroupingPlan rebind_plan(const GroupingPlan& plan, const PredictionMatrix& preds);

/// sample_id,f_dowa_0,f_dowa_1,f_iowa_0,f_iowa_1,source,meta_score,predicted,true
void write_fusion_trace_csv(std::ostream& out, std::span<const FusionTrace> traces);

}  // namespace attnfuse
