#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attnfuse/matrix.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  /// Sum of sample weights reaching the node (bootstrap multiplicity counts).
  double weight = 0.0;
  /// Leaf output: weighted class-1 fraction, or the regression leaf value.
  double value = 0.0;
  double impurity = 0.0;
  /// Node impurity minus the weight-averaged impurity of its children.
  double impurity_decrease = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

enum class SplitMode {
  best,    // exhaustive search over midpoints of consecutive distinct values
  random,  // one uniform threshold per feature between the node min and max
};

struct TreeOptions {
  int max_depth = 10;
  int min_samples_split = 2;
  /// Number of non-constant features examined per node; 0 means all.
  int features_per_split = 0;
  SplitMode mode = SplitMode::best;
};

/// Binary CART classifier on Gini impurity.
class ClassificationTree {
 public:
  /// rows may repeat (bootstrap draws). weights is either empty (unit
  /// weights) or parallel to rows.
  static ClassificationTree fit(const Matrix& x, std::span<const int> labels,
                                std::span<const std::size_t> rows, std::span<const double> weights,
                                const TreeOptions& options, Rng& rng);

  /// Class-1 fraction of the leaf that row falls into.
  double predict(std::span<const double> row) const;

  /// Adds (node weight / root weight) * impurity decrease of every split to
  /// the slot of its feature.
  void accumulate_importance(std::span<double> importance) const;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

/// Squared-error regression tree grown level by level over presorted
/// feature orders. Leaf values are sum(target) / sum(hessian), the Newton
/// step used by logistic gradient boosting.
class RegressionTree {
 public:
  /// sorted_rows[f] lists the training rows in ascending order of feature f.
  static RegressionTree fit(const Matrix& x,
                            const std::vector<std::vector<std::size_t>>& sorted_rows,
                            std::span<const double> targets, std::span<const double> hessians,
                            int max_depth, int min_samples_split);

  double predict(std::span<const double> row) const;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

/// Row indices sorted by each feature column; ties keep ascending row order.
std::vector<std::vector<std::size_t>> presort_columns(const Matrix& x,
                                                      std::span<const std::size_t> rows);

}  // namespace attnfuse
