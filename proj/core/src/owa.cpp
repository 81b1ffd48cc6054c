#include "attnfuse/owa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "attnfuse/error.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse::owa {

namespace {

constexpr double kSimplexTolerance = 1e-9;

void require_finite_betas(std::span<const double> betas) {
  if (betas.empty()) throw NumericError("OWA model has no parameters");
  for (double beta : betas) {
    if (!std::isfinite(beta)) throw NumericError("OWA model parameter is not finite (corrupt model)");
  }
}

}  // namespace

OwaWeightVector::OwaWeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= -kSimplexTolerance && w <= 1.0 + kSimplexTolerance)) {
      throw NumericError("OWA weight outside [0, 1]");
    }
    total += w;
  }
  if (weights_.empty() || std::abs(total - 1.0) > kSimplexTolerance) {
    throw NumericError("OWA weights do not sum to 1");
  }
}

void validate_arguments(std::span<const double> args) {
  if (args.empty()) throw DataError(DataIssue::empty_input, "argument vector is empty");
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!std::isfinite(args[i]) || args[i] < 0.0 || args[i] > 1.0) {
      throw DataError(DataIssue::non_finite,
                      "argument " + std::to_string(i) + " is not a finite value in [0, 1]");
    }
  }
}

double mean_of(std::span<const double> args) {
  validate_arguments(args);
  return std::accumulate(args.begin(), args.end(), 0.0) / static_cast<double>(args.size());
}

OrderedArguments order_descending(std::span<const double> args) {
  OrderedArguments out;
  out.permutation.resize(args.size());
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return args[a] > args[b]; });
  out.sorted.reserve(args.size());
  for (std::size_t idx : out.permutation) out.sorted.push_back(args[idx]);
  return out;
}

double owa_combine(std::span<const double> weights, std::span<const double> args) {
  if (weights.size() != args.size()) {
    throw DimensionError("OWA expects " + std::to_string(weights.size()) + " arguments, got " +
                         std::to_string(args.size()));
  }
  const auto ordered = order_descending(args);
  double value = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) value += weights[j] * ordered.sorted[j];
  return value;
}

std::vector<double> dowa_similarities(std::span<const double> args) {
  const double mean = mean_of(args);
  const auto ordered = order_descending(args);

  double total_deviation = 0.0;
  for (double p : args) total_deviation += std::abs(p - mean);

  std::vector<double> similarity(args.size(), 1.0);
  const auto [lo, hi] = std::minmax_element(args.begin(), args.end());
  if (*lo == *hi || total_deviation == 0.0) return similarity;
  for (std::size_t j = 0; j < args.size(); ++j) {
    similarity[j] = 1.0 - std::abs(ordered.sorted[j] - mean) / total_deviation;
  }
  return similarity;
}

OwaWeightVector dowa_weights(std::span<const double> args) {
  auto similarity = dowa_similarities(args);
  const double total = std::accumulate(similarity.begin(), similarity.end(), 0.0);
  // Only n == 1 with a nonzero deviation could zero the total, and a single
  // argument never deviates from its own mean.
  for (double& c : similarity) c /= total;
  return OwaWeightVector(std::move(similarity));
}

double dowa_aggregate(std::span<const double> args) {
  const auto weights = dowa_weights(args);
  return owa_combine(weights.values(), args);
}

std::vector<double> softmax(std::span<const double> betas) {
  require_finite_betas(betas);
  const double shift = *std::max_element(betas.begin(), betas.end());
  std::vector<double> weights(betas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    weights[i] = std::exp(betas[i] - shift);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

OwaWeightVector iowa_weights(const IowaModel& model) {
  return OwaWeightVector(softmax(model.betas));
}

double iowa_predict(const IowaModel& model, std::span<const double> args) {
  if (args.size() != model.betas.size()) {
    throw DimensionError("IOWA model expects " + std::to_string(model.betas.size()) +
                         " arguments, got " + std::to_string(args.size()));
  }
  const auto weights = softmax(model.betas);
  return owa_combine(weights, args);
}

std::vector<double> iowa_error_gradient(std::span<const double> betas,
                                        std::span<const double> args, double target) {
  if (args.size() != betas.size()) throw DimensionError("gradient: argument length mismatch");
  const auto weights = softmax(betas);
  const auto ordered = order_descending(args);
  double estimate = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) estimate += weights[j] * ordered.sorted[j];

  std::vector<double> gradient(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    gradient[i] = weights[i] * (ordered.sorted[i] - estimate) * (estimate - target);
  }
  return gradient;
}

IowaModel iowa_train(std::span<const IowaTrainingSample> samples, const IowaTrainOptions& options) {
  if (!(options.learning_rate > 0.0 && options.learning_rate < 1.0)) {
    throw ConfigError("IOWA learning rate must lie in (0, 1)");
  }
  if (options.max_epochs < 1) throw ConfigError("IOWA max_epochs must be at least 1");
  if (samples.empty()) throw DataError(DataIssue::empty_input, "IOWA training set is empty");

  const std::size_t n = samples.front().arguments.size();
  // Pre-sort once; the update only ever sees ordered arguments.
  std::vector<std::vector<double>> sorted(samples.size());
  std::vector<double> targets(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& sample = samples[k];
    if (sample.arguments.size() != n) {
      throw DimensionError("IOWA sample " + std::to_string(k) + " has " +
                           std::to_string(sample.arguments.size()) + " arguments, expected " +
                           std::to_string(n));
    }
    validate_arguments(sample.arguments);
    if (!std::isfinite(sample.target) || sample.target < 0.0 || sample.target > 1.0) {
      throw DataError(DataIssue::non_finite,
                      "IOWA sample " + std::to_string(k) + " has a target outside [0, 1]");
    }
    sorted[k] = order_descending(sample.arguments).sorted;
    targets[k] = sample.target;
  }

  IowaModel model;
  model.learning_rate = options.learning_rate;
  model.betas.assign(n, 0.0);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  std::vector<double> weights(n);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double error_sum = 0.0;
    for (std::size_t k : order) {
      const auto& b = sorted[k];
      const double shift = *std::max_element(model.betas.begin(), model.betas.end());
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::exp(model.betas[i] - shift);
        total += weights[i];
      }
      double estimate = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        weights[i] /= total;
        estimate += b[i] * weights[i];
      }
      const double residual = estimate - targets[k];
      error_sum += 0.5 * residual * residual;
      for (std::size_t i = 0; i < n; ++i) {
        model.betas[i] -= options.learning_rate * weights[i] * (b[i] - estimate) * residual;
      }
    }
    const double mean_error = error_sum / static_cast<double>(samples.size());
    if (!std::isfinite(mean_error)) throw NumericError("IOWA training diverged");
    model.epoch_errors.push_back(mean_error);
    model.epochs_run = epoch + 1;
    model.final_mean_error = mean_error;

    if (mean_error == 0.0) break;
    if (epoch > 0) {
      const double previous = model.epoch_errors[model.epoch_errors.size() - 2];
      if (previous - mean_error < options.tolerance * previous) break;
    }
  }
  require_finite_betas(model.betas);
  return model;
}

}  // namespace attnfuse::owa
