#include "attnfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "attnfuse/data_io.hpp"
#include "attnfuse/dataset.hpp"
#include "attnfuse/error.hpp"

namespace attnfuse {

ConfusionCounts confusion_from(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("confusion: length mismatch");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool positive = predicted[i] == 1;
    if (truth[i] == 1) {
      (positive ? counts.tp : counts.fn) += 1;
    } else {
      (positive ? counts.fp : counts.tn) += 1;
    }
  }
  return counts;
}

ScalarMetrics compute_metrics(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw DataError(DataIssue::empty_input, "no evaluated samples");
  const auto tp = static_cast<double>(counts.tp);
  const auto fp = static_cast<double>(counts.fp);
  const auto tn = static_cast<double>(counts.tn);
  const auto fn = static_cast<double>(counts.fn);

  ScalarMetrics m;
  auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      m.degenerate.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  m.precision = ratio(tp, tp + fp, "precision");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.accuracy = (tp + tn) / (tp + tn + fp + fn);
  m.sensitivity = ratio(tp, tp + fn, "sensitivity");
  const double mcc_den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  m.mcc = ratio(tp * tn - fp * fn, mcc_den, "mcc");
  m.f1 = ratio(2.0 * m.precision * m.sensitivity, m.precision + m.sensitivity, "f1");
  return m;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc: scores and labels differ in length");
  require_both_classes(labels, "roc curve");
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("roc: score is NaN");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double positives = 0.0;
  for (int y : labels) positives += y == 1 ? 1.0 : 0.0;
  const double negatives = static_cast<double>(labels.size()) - positives;

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    const RocPoint point{threshold, fp / negatives, tp / positives};
    const auto& prev = curve.points.back();
    curve.auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
    curve.points.push_back(point);
  }
  return curve;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    out << (std::isinf(p.threshold) ? std::string(p.threshold > 0 ? "inf" : "-inf")
                                    : format_double(p.threshold))
        << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  }
}

}  // namespace attnfuse
