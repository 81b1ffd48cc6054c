#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "attnfuse/dataset.hpp"
#include "attnfuse/matrix.hpp"
#include "attnfuse/tree.hpp"

namespace attnfuse {

enum class LearnerKind { boosted_trees, sgd, extra_trees, adaboost, svm, mlp };

/// Column prefix used in prediction files: bt, sgd, et, ab, svm, mlp.
std::string_view short_name(LearnerKind kind) noexcept;
std::string_view long_name(LearnerKind kind) noexcept;

/// Accepts short or long names, case-insensitively. Throws ConfigError.
LearnerKind parse_learner_kind(std::string_view text);

struct ClassifierSpec {
  LearnerKind kind = LearnerKind::sgd;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  std::string name() const { return std::string(short_name(kind)); }
};

/// The six first-layer learners in roster order BT, SGD, ET, AB, SVM, MLP,
/// each seeded from (seed, position).
std::vector<ClassifierSpec> default_roster(std::uint64_t seed);

class ProbabilisticClassifier {
 public:
  virtual ~ProbabilisticClassifier() = default;

  virtual LearnerKind kind() const noexcept = 0;
  virtual void fit(const Dataset& data) = 0;
  /// One row per input row: (P(class 0), P(class 1)).
  virtual Matrix predict_proba(const Matrix& rows) const = 0;
};

/// Validates the spec's hyperparameters and returns an untrained learner.
/// Throws ConfigError for unknown keys or out-of-range values.
std::unique_ptr<ProbabilisticClassifier> build(const ClassifierSpec& spec);

/// Zero-mean, unit-variance scaling with statistics from the fitting rows.
class Standardizer {
 public:
  void fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
  void transform_row(std::span<const double> in, std::span<double> out) const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

// Concrete learners. Hyperparameter defaults are listed on each.

/// Logistic regression by per-sample SGD.
/// learning_rate 0.01, epochs 50, l2 0.
class SgdClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    double learning_rate = 0.01;
    int epochs = 50;
    double l2 = 0.0;
  };
  SgdClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::sgd; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;

 private:
  Params params_;
  std::uint64_t seed_;
  Standardizer scaler_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

/// Linear hinge-loss SVM by subgradient descent with a Platt sigmoid fitted
/// to its training decision values.
/// learning_rate 0.01, epochs 50, lambda 1e-4.
class LinearSvmClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    double learning_rate = 0.01;
    int epochs = 50;
    double lambda = 1e-4;
  };
  LinearSvmClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::svm; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;
  double decision(std::span<const double> standardized_row) const;

 private:
  Params params_;
  std::uint64_t seed_;
  Standardizer scaler_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double platt_a_ = 1.0;
  double platt_b_ = 0.0;
};

/// Fits P(y = 1 | f) = 1 / (1 + exp(-(a f + b))) by Newton's method on
/// Platt's smoothed targets. Returns (a, b).
std::pair<double, double> fit_platt_sigmoid(std::span<const double> decisions,
                                            std::span<const int> labels);

/// One tanh hidden layer, softmax output, cross-entropy, minibatch gradient
/// descent with momentum.
/// hidden_units 32, learning_rate 0.01, momentum 0.9, epochs 50, batch_size 32.
class MlpClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    int hidden_units = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 50;
    int batch_size = 32;
  };
  MlpClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::mlp; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;
  int hidden_units() const noexcept { return params_.hidden_units; }

 private:
  Params params_;
  std::uint64_t seed_;
  Standardizer scaler_;
  std::size_t inputs_ = 0;
  std::vector<double> w1_, b1_, w2_, b2_;  // w1: hidden x inputs, w2: 2 x hidden
};

/// Randomized trees without bootstrap; probability is the mean leaf
/// class-1 fraction.
/// n_trees 100, max_depth 32, min_samples_split 2, features_per_split ceil(sqrt(d)).
class ExtraTreesClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    int n_trees = 100;
    int max_depth = 32;
    int min_samples_split = 2;
    int features_per_split = 0;
  };
  ExtraTreesClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::extra_trees; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;

 private:
  Params params_;
  std::uint64_t seed_;
  std::size_t dims_ = 0;
  std::vector<ClassificationTree> trees_;
};

/// Discrete (two-class SAMME) AdaBoost over depth-1 Gini stumps.
/// P(class 1) is the logistic of the alpha-weighted vote margin.
/// n_estimators 50.
class AdaBoostClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    int n_estimators = 50;
  };
  AdaBoostClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::adaboost; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;
  std::size_t stage_count() const noexcept { return stumps_.size(); }

 private:
  Params params_;
  std::uint64_t seed_;
  std::size_t dims_ = 0;
  std::vector<ClassificationTree> stumps_;
  std::vector<double> alphas_;
};

/// Gradient boosting on the logistic loss with Newton leaf values.
/// n_trees 100, max_depth 3, shrinkage 0.1, min_samples_split 2.
class BoostedTreesClassifier final : public ProbabilisticClassifier {
 public:
  struct Params {
    int n_trees = 100;
    int max_depth = 3;
    double shrinkage = 0.1;
    int min_samples_split = 2;
  };
  BoostedTreesClassifier(Params params, std::uint64_t seed) : params_(params), seed_(seed) {}
  LearnerKind kind() const noexcept override { return LearnerKind::boosted_trees; }
  void fit(const Dataset& data) override;
  Matrix predict_proba(const Matrix& rows) const override;

 private:
  Params params_;
  std::uint64_t seed_;
  std::size_t dims_ = 0;
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
};

}  // namespace attnfuse
