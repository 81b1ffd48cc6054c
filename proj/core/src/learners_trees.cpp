#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "attnfuse/error.hpp"
#include "attnfuse/learners.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void require_trainable(const Dataset& data, const char* who) {
  if (data.size() == 0) throw DataError(DataIssue::empty_input, std::string(who) + ": no rows");
  require_both_classes(data.labels, who);
}

Matrix to_proba(std::span<const double> p1) {
  Matrix out(p1.size(), 2);
  for (std::size_t r = 0; r < p1.size(); ++r) {
    out(r, 0) = 1.0 - p1[r];
    out(r, 1) = p1[r];
  }
  return out;
}

void require_width(const Matrix& rows, std::size_t dims, const char* who) {
  if (rows.cols() != dims) throw DimensionError(std::string(who) + ": column count mismatch");
}

}  // namespace

void ExtraTreesClassifier::fit(const Dataset& data) {
  require_trainable(data, "extra_trees");
  dims_ = data.dims();
  TreeOptions options;
  options.max_depth = params_.max_depth;
  options.min_samples_split = params_.min_samples_split;
  options.features_per_split =
      params_.features_per_split > 0
          ? params_.features_per_split
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.dims()))));
  options.mode = SplitMode::random;

  const auto rows = all_rows(data.size());
  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(params_.n_trees));
  for (int t = 0; t < params_.n_trees; ++t) {
    Rng rng(mix_seed(seed_, static_cast<std::uint64_t>(t)));
    trees_.push_back(ClassificationTree::fit(data.features, data.labels, rows, {}, options, rng));
  }
}

Matrix ExtraTreesClassifier::predict_proba(const Matrix& rows) const {
  require_width(rows, dims_, "extra_trees");
  std::vector<double> p1(rows.rows(), 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (const auto& tree : trees_) p1[r] += tree.predict(rows.row(r));
    p1[r] /= static_cast<double>(trees_.size());
  }
  return to_proba(p1);
}

void AdaBoostClassifier::fit(const Dataset& data) {
  require_trainable(data, "adaboost");
  dims_ = data.dims();
  TreeOptions options;
  options.max_depth = 1;
  options.min_samples_split = 2;
  options.features_per_split = 0;
  options.mode = SplitMode::best;

  const std::size_t n = data.size();
  const auto rows = all_rows(n);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<int> vote(n);
  stumps_.clear();
  alphas_.clear();
  Rng rng(seed_);

  for (int stage = 0; stage < params_.n_estimators; ++stage) {
    auto stump = ClassificationTree::fit(data.features, data.labels, rows, weights, options, rng);
    double error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vote[i] = stump.predict(data.features.row(i)) > 0.5 ? 1 : 0;
      if (vote[i] != data.labels[i]) error += weights[i];
    }
    if (error >= 0.5) break;
    error = std::max(error, 1e-10);
    const double alpha = std::log((1.0 - error) / error);
    stumps_.push_back(std::move(stump));
    alphas_.push_back(alpha);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (vote[i] != data.labels[i]) weights[i] *= std::exp(alpha);
      total += weights[i];
    }
    for (auto& w : weights) w /= total;
    if (error <= 1e-10) break;
  }
}

Matrix AdaBoostClassifier::predict_proba(const Matrix& rows) const {
  require_width(rows, dims_, "adaboost");
  std::vector<double> p1(rows.rows(), 0.5);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    double margin = 0.0;
    for (std::size_t t = 0; t < stumps_.size(); ++t) {
      margin += alphas_[t] * (stumps_[t].predict(rows.row(r)) > 0.5 ? 1.0 : -1.0);
    }
    p1[r] = sigmoid(margin);
  }
  return to_proba(p1);
}

void BoostedTreesClassifier::fit(const Dataset& data) {
  require_trainable(data, "boosted_trees");
  dims_ = data.dims();
  const std::size_t n = data.size();
  const auto prior = static_cast<double>(data.count_positive()) / static_cast<double>(n);
  base_score_ = std::log(prior / (1.0 - prior));

  const auto sorted = presort_columns(data.features, all_rows(n));
  std::vector<double> score(n, base_score_);
  std::vector<double> residual(n), hessian(n);
  trees_.clear();
  for (int t = 0; t < params_.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      residual[i] = data.labels[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    auto tree = RegressionTree::fit(data.features, sorted, residual, hessian, params_.max_depth,
                                    params_.min_samples_split);
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += params_.shrinkage * tree.predict(data.features.row(i));
    }
    trees_.push_back(std::move(tree));
  }
}

Matrix BoostedTreesClassifier::predict_proba(const Matrix& rows) const {
  require_width(rows, dims_, "boosted_trees");
  std::vector<double> p1(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    double score = base_score_;
    for (const auto& tree : trees_) score += params_.shrinkage * tree.predict(rows.row(r));
    p1[r] = sigmoid(score);
  }
  return to_proba(p1);
}

}  // namespace attnfuse
