#include <algorithm>
#include <cmath>
#include <numeric>

#include "attnfuse/error.hpp"
#include "attnfuse/learners.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

namespace {

// Writes hidden activations and output probabilities for one standardized row.
void forward(std::span<const double> x, std::size_t hidden, const std::vector<double>& w1,
             const std::vector<double>& b1, const std::vector<double>& w2,
             const std::vector<double>& b2, std::span<double> h, double out[2]) {
  const std::size_t inputs = x.size();
  for (std::size_t j = 0; j < hidden; ++j) {
    double a = b1[j];
    const double* wj = w1.data() + j * inputs;
    for (std::size_t i = 0; i < inputs; ++i) a += wj[i] * x[i];
    h[j] = std::tanh(a);
  }
  double logits[2];
  for (std::size_t k = 0; k < 2; ++k) {
    double a = b2[k];
    const double* wk = w2.data() + k * hidden;
    for (std::size_t j = 0; j < hidden; ++j) a += wk[j] * h[j];
    logits[k] = a;
  }
  const double shift = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - shift);
  const double e1 = std::exp(logits[1] - shift);
  out[0] = e0 / (e0 + e1);
  out[1] = e1 / (e0 + e1);
}

}  // namespace

void MlpClassifier::fit(const Dataset& data) {
  if (data.size() == 0) throw DataError(DataIssue::empty_input, "mlp: no rows");
  require_both_classes(data.labels, "mlp");
  scaler_.fit(data.features);
  const Matrix x = scaler_.transform(data.features);
  inputs_ = x.cols();
  const auto hidden = static_cast<std::size_t>(params_.hidden_units);

  Rng rng(seed_);
  auto glorot = [&](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : w) v = rng.uniform(-limit, limit);
  };
  w1_.assign(hidden * inputs_, 0.0);
  b1_.assign(hidden, 0.0);
  w2_.assign(2 * hidden, 0.0);
  b2_.assign(2, 0.0);
  glorot(w1_, std::max<std::size_t>(inputs_, 1), hidden);
  glorot(w2_, hidden, 2);

  std::vector<double> vw1(w1_.size(), 0.0), vb1(hidden, 0.0), vw2(w2_.size(), 0.0), vb2(2, 0.0);
  std::vector<double> gw1(w1_.size()), gb1(hidden), gw2(w2_.size()), gb2(2);
  std::vector<double> h(hidden), dh(hidden);

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(params_.batch_size);

  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      std::fill(gb2.begin(), gb2.end(), 0.0);
      for (std::size_t s = start; s < stop; ++s) {
        const std::size_t i = order[s];
        const auto row = x.row(i);
        double p[2];
        forward(row, hidden, w1_, b1_, w2_, b2_, h, p);
        const double delta[2] = {p[0] - (data.labels[i] == 0 ? 1.0 : 0.0),
                                 p[1] - (data.labels[i] == 1 ? 1.0 : 0.0)};
        for (std::size_t j = 0; j < hidden; ++j) {
          gw2[j] += delta[0] * h[j];
          gw2[hidden + j] += delta[1] * h[j];
          dh[j] = (delta[0] * w2_[j] + delta[1] * w2_[hidden + j]) * (1.0 - h[j] * h[j]);
          gb1[j] += dh[j];
          double* g = gw1.data() + j * inputs_;
          for (std::size_t c = 0; c < inputs_; ++c) g[c] += dh[j] * row[c];
        }
        gb2[0] += delta[0];
        gb2[1] += delta[1];
      }
      const double scale = params_.learning_rate / static_cast<double>(stop - start);
      auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
        for (std::size_t t = 0; t < w.size(); ++t) {
          v[t] = params_.momentum * v[t] - scale * g[t];
          w[t] += v[t];
        }
      };
      step(w1_, vw1, gw1);
      step(b1_, vb1, gb1);
      step(w2_, vw2, gw2);
      step(b2_, vb2, gb2);
    }
  }
  for (double v : w2_) {
    if (!std::isfinite(v)) throw NumericError("mlp: training diverged");
  }
}

Matrix MlpClassifier::predict_proba(const Matrix& rows) const {
  const auto hidden = static_cast<std::size_t>(params_.hidden_units);
  Matrix out(rows.rows(), 2);
  std::vector<double> z(rows.cols()), h(hidden);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    scaler_.transform_row(rows.row(r), z);
    double p[2];
    forward(z, hidden, w1_, b1_, w2_, b2_, h, p);
    out(r, 0) = p[0];
    out(r, 1) = p[1];
  }
  return out;
}

}  // namespace attnfuse
