#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace attnfuse::owa {

/// Arguments sorted in descending order together with the rank -> source
/// index map. Ties keep their original relative order.
struct OrderedArguments {
  std::vector<double> sorted;
  std::vector<std::size_t> permutation;
};

/// Position weights of an OWA operator. Nonnegative and summing to one.
class OwaWeightVector {
 public:
  OwaWeightVector() = default;
  /// Throws NumericError if the weights leave the probability simplex
  /// (tolerance 1e-9).
  explicit OwaWeightVector(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> values() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Checks that args is non-empty and every value is finite and in [0, 1].
/// Throws DataError otherwise.
void validate_arguments(std::span<const double> args);

double mean_of(std::span<const double> args);

OrderedArguments order_descending(std::span<const double> args);

/// Weighted sum of the descending-sorted arguments. Sizes must match.
double owa_combine(std::span<const double> weights, std::span<const double> args);

// ---------------------------------------------------------------------------
// Dependent OWA: weights come from each ordered argument's closeness to the
// mean, so an argument far from the others is down-weighted. Weights are
// recomputed for every argument vector.

/// Similarity of each ranked argument to the mean,
///   c_j = 1 - |b_j - m| / sum_i |p_i - m|,
/// returned in rank order. All-equal input yields all ones.
std::vector<double> dowa_similarities(std::span<const double> args);

/// c_j / sum(c), in rank order. All-equal input yields uniform weights.
OwaWeightVector dowa_weights(std::span<const double> args);

double dowa_aggregate(std::span<const double> args);

// ---------------------------------------------------------------------------
// Learned OWA: position weights are a softmax of free parameters fitted by
// per-sample gradient descent on the squared aggregation error.

struct IowaTrainingSample {
  std::vector<double> arguments;
  double target = 0.0;
};

struct IowaModel {
  std::vector<double> betas;
  double learning_rate = 0.1;
  int epochs_run = 0;
  double final_mean_error = 0.0;
  /// Mean instantaneous error of each epoch, in order.
  std::vector<double> epoch_errors;
};

struct IowaTrainOptions {
  double learning_rate = 0.1;
  int max_epochs = 200;
  /// Training stops once an epoch improves the mean error by less than
  /// tolerance * (previous epoch's mean error).
  double tolerance = 1e-6;
  /// Seeds the per-epoch shuffle of the sample order.
  std::uint64_t seed = 0;
};

/// Max-shifted softmax. Throws NumericError on a non-finite input.
std::vector<double> softmax(std::span<const double> betas);

OwaWeightVector iowa_weights(const IowaModel& model);

/// Throws DimensionError when args and model sizes differ.
double iowa_predict(const IowaModel& model, std::span<const double> args);

/// Gradient of e = 0.5 (sum_j b_j w_j - target)^2 with respect to each beta,
///   de/dbeta_i = w_i (b_i - d_hat)(d_hat - target),
/// where b is the descending-sorted argument vector.
std::vector<double> iowa_error_gradient(std::span<const double> betas,
                                        std::span<const double> args, double target);

/// Starts from zero betas and applies one update per sample per epoch.
/// Throws DimensionError for inconsistent argument lengths and DataError for
/// a non-finite or out-of-range target.
IowaModel iowa_train(std::span<const IowaTrainingSample> samples,
                     const IowaTrainOptions& options = {});

}  // namespace attnfuse::owa
