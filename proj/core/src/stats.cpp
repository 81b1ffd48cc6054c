#include "attnfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attnfuse/error.hpp"

namespace attnfuse {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  if (x.size() < 2) throw DataError(DataIssue::empty_input, "pearson: need at least two samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

CorrelationMatrix column_correlations(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t k = data.cols();
  if (n < 2) throw DataError(DataIssue::empty_input, "correlation needs at least two samples");

  std::vector<std::vector<double>> columns(k, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) columns[c][r] = data(r, c);
  }

  CorrelationMatrix out{Matrix(k, k), {}};
  std::vector<bool> constant(k, false);
  for (std::size_t a = 0; a < k; ++a) {
    out.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto r = pearson(columns[a], columns[b]);
      out.values(a, b) = out.values(b, a) = r.value;
    }
    const double m = mean(columns[a]);
    constant[a] = std::all_of(columns[a].begin(), columns[a].end(),
                              [m](double v) { return v == m; });
    if (constant[a]) out.constant_columns.push_back(a);
  }
  return out;
}

}  // namespace attnfuse
