#include <cmath>
#include <numeric>
#include <tuple>

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

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void require_trainable(const Dataset& data, const char* who) {
  if (data.size() == 0) throw DataError(DataIssue::empty_input, std::string(who) + ": no rows");
  require_both_classes(data.labels, who);
}

}  // namespace

void SgdClassifier::fit(const Dataset& data) {
  require_trainable(data, "sgd");
  scaler_.fit(data.features);
  const Matrix x = scaler_.transform(data.features);
  weights_.assign(x.cols(), 0.0);
  bias_ = 0.0;

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed_);
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      const auto row = x.row(i);
      const double err = sigmoid(dot(weights_, row) + bias_) - data.labels[i];
      for (std::size_t c = 0; c < weights_.size(); ++c) {
        weights_[c] -= params_.learning_rate * (err * row[c] + params_.l2 * weights_[c]);
      }
      bias_ -= params_.learning_rate * err;
    }
  }
  if (!std::isfinite(bias_)) throw NumericError("sgd: training diverged");
}

Matrix SgdClassifier::predict_proba(const Matrix& rows) const {
  Matrix out(rows.rows(), 2);
  std::vector<double> z(rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    scaler_.transform_row(rows.row(r), z);
    const double p1 = sigmoid(dot(weights_, z) + bias_);
    out(r, 0) = 1.0 - p1;
    out(r, 1) = p1;
  }
  return out;
}

std::pair<double, double> fit_platt_sigmoid(std::span<const double> decisions,
                                            std::span<const int> labels) {
  double positives = 0.0;
  for (int y : labels) positives += y;
  const double negatives = static_cast<double>(labels.size()) - positives;
  const double hi = (positives + 1.0) / (positives + 2.0);
  const double lo = 1.0 / (negatives + 2.0);

  auto loss = [&](double a, double b) {
    double total = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const double t = labels[i] == 1 ? hi : lo;
      const double u = a * decisions[i] + b;
      // -t log s(u) - (1 - t) log(1 - s(u)), written to avoid overflow
      total += (u >= 0.0 ? (1.0 - t) * u + std::log1p(std::exp(-u))
                         : -t * u + std::log1p(std::exp(u)));
    }
    return total;
  };

  double a = 0.0;
  double b = std::log((positives + 1.0) / (negatives + 1.0));
  double current = loss(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const double t = labels[i] == 1 ? hi : lo;
      const double f = decisions[i];
      const double s = sigmoid(a * f + b);
      const double g = s - t;
      const double h = s * (1.0 - s);
      ga += g * f;
      gb += g;
      haa += h * f * f;
      hab += h * f;
      hbb += h;
    }
    if (std::abs(ga) < 1e-9 && std::abs(gb) < 1e-9) break;
    const double det = haa * hbb - hab * hab;
    double da = det > 0.0 ? (hbb * ga - hab * gb) / det : ga;
    double db = det > 0.0 ? (haa * gb - hab * ga) / det : gb;
    double step = 1.0;
    bool improved = false;
    while (step > 1e-10) {
      const double trial = loss(a - step * da, b - step * db);
      if (trial < current) {
        a -= step * da;
        b -= step * db;
        current = trial;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {a, b};
}

double LinearSvmClassifier::decision(std::span<const double> standardized_row) const {
  return dot(weights_, standardized_row) + bias_;
}

void LinearSvmClassifier::fit(const Dataset& data) {
  require_trainable(data, "svm");
  scaler_.fit(data.features);
  const Matrix x = scaler_.transform(data.features);
  weights_.assign(x.cols(), 0.0);
  bias_ = 0.0;

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed_);
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      const auto row = x.row(i);
      const double y = data.labels[i] == 1 ? 1.0 : -1.0;
      const bool violated = y * decision(row) < 1.0;
      for (std::size_t c = 0; c < weights_.size(); ++c) {
        const double sub = params_.lambda * weights_[c] - (violated ? y * row[c] : 0.0);
        weights_[c] -= params_.learning_rate * sub;
      }
      if (violated) bias_ += params_.learning_rate * y;
    }
  }
  if (!std::isfinite(bias_)) throw NumericError("svm: training diverged");

  std::vector<double> decisions(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) decisions[i] = decision(x.row(i));
  std::tie(platt_a_, platt_b_) = fit_platt_sigmoid(decisions, data.labels);
}

Matrix LinearSvmClassifier::predict_proba(const Matrix& rows) const {
  Matrix out(rows.rows(), 2);
  std::vector<double> z(rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    scaler_.transform_row(rows.row(r), z);
    const double p1 = sigmoid(platt_a_ * decision(z) + platt_b_);
    out(r, 0) = 1.0 - p1;
    out(r, 1) = p1;
  }
  return out;
}

}  // namespace attnfuse
