#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attnfuse/dataset.hpp"
#include "attnfuse/learners.hpp"
#include "attnfuse/matrix.hpp"

namespace attnfuse {

/// Out-of-fold probability table: one row per sample, two columns
/// (class 0, class 1) per learner.
struct PredictionMatrix {
  std::vector<std::string> learners;
  std::vector<std::size_t> sample_ids;
  std::vector<int> folds;
  std::vector<int> labels;
  Matrix probabilities;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t learner_count() const noexcept { return learners.size(); }

  double p(std::size_t sample, std::size_t learner, int cls) const {
    return probabilities(sample, 2 * learner + static_cast<std::size_t>(cls));
  }
  std::vector<double> column(std::size_t learner, int cls) const;
  std::optional<std::size_t> learner_index(std::string_view name) const;

  /// Checks shapes and that every row holds distributions (tolerance 1e-6).
  void validate() const;

  PredictionMatrix subset(std::span<const std::size_t> rows) const;
};

/// Columns: sample_id, fold, true_class, then <learner>_p0, <learner>_p1.
void write_prediction_csv(std::ostream& out, const PredictionMatrix& preds);
PredictionMatrix read_prediction_csv(std::istream& in);
PredictionMatrix read_prediction_csv(const std::filesystem::path& path);

/// Which rows trained the component that scored one fold.
struct FoldProvenance {
  std::string stage;
  std::string component;
  int fold = 0;
  std::vector<std::size_t> training_rows;
};

struct OutOfFoldResult {
  PredictionMatrix predictions;
  std::vector<FoldProvenance> provenance;
};

/// Stratified k-fold out-of-fold probabilities for every spec. Learners and
/// folds run in parallel; output order does not depend on scheduling.
OutOfFoldResult fit_predict_out_of_fold(const std::vector<ClassifierSpec>& specs,
                                        const Dataset& data, int k_folds, std::uint64_t seed);

/// Descriptions of every provenance record whose training rows include a row
/// of the fold it scored. Empty means no leakage.
std::vector<std::string> find_leakage(std::span<const int> folds,
                                      std::span<const FoldProvenance> provenance);

/// Fraction of rows where the learner's argmax (ties to class 1) matches the label.
double learner_accuracy(const PredictionMatrix& preds, std::size_t learner);

}  // namespace attnfuse
