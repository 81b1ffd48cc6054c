#pragma once

#include <span>
#include <vector>

#include "attnfuse/matrix.hpp"

namespace attnfuse {

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> values);

struct PearsonResult {
  double value = 0.0;
  /// True when either column has zero variance; value is then 0.
  bool degenerate = false;
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  Matrix values;
  /// Column indices found to have zero variance.
  std::vector<std::size_t> constant_columns;
};

/// Pairwise Pearson correlation of the columns of data. The diagonal is 1;
/// pairs involving a constant column are 0 and the column is reported.
CorrelationMatrix column_correlations(const Matrix& data);

}  // namespace attnfuse
