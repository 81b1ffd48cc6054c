#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace attnfuse {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Class 1 is the positive class. Throws DimensionError on length mismatch.
ConfusionCounts confusion_from(std::span<const int> predicted, std::span<const int> truth);

struct ScalarMetrics {
  double precision = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double mcc = 0.0;
  double f1 = 0.0;
  /// Names of metrics whose denominator was zero; those are reported as 0.
  std::vector<std::string> degenerate;
};

/// Precision, specificity, accuracy, sensitivity, Matthews correlation and
/// F1 from the counts. Throws DataError when the counts are all zero.
ScalarMetrics compute_metrics(const ConfusionCounts& counts);

struct RocPoint {
  double threshold = 0.0;  // +inf for the origin
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps thresholds over the distinct scores in descending order (a score
/// counts as positive when >= threshold). Equal scores form one step, and
/// AUC is the trapezoidal area. Throws DataError unless both classes occur.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// threshold,fpr,tpr
void write_roc_csv(std::ostream& out, const RocCurve& curve);

}  // namespace attnfuse
