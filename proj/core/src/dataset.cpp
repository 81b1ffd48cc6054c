#include "attnfuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attnfuse/error.hpp"

namespace attnfuse {

const char* to_string(DataIssue issue) noexcept {
  switch (issue) {
    case DataIssue::none: return "none";
    case DataIssue::empty_input: return "empty_input";
    case DataIssue::missing_column: return "missing_column";
    case DataIssue::non_numeric: return "non_numeric";
    case DataIssue::label_domain: return "label_domain";
    case DataIssue::non_finite: return "non_finite";
    case DataIssue::degenerate_labels: return "degenerate_labels";
    case DataIssue::stratification: return "stratification";
    case DataIssue::dimension: return "dimension";
  }
  return "unknown";
}

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw DimensionError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  if (features.cols() != feature_names.size()) {
    throw DimensionError("dataset has " + std::to_string(features.cols()) + " columns but " +
                         std::to_string(feature_names.size()) + " feature names");
  }
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) {
        throw DataError(DataIssue::non_finite, "row " + std::to_string(r) + ", column '" +
                                                   feature_names[c] + "': value is not finite");
      }
    }
    if (labels[r] != 0 && labels[r] != 1) {
      throw DataError(DataIssue::label_domain,
                      "row " + std::to_string(r) + ": label " + std::to_string(labels[r]) +
                          " is not 0 or 1");
    }
  }
}

std::size_t Dataset::count_positive() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.features = Matrix(rows.size(), dims());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

Dataset Dataset::select_features(std::span<const std::size_t> columns) const {
  Dataset out;
  out.labels = labels;
  out.features = Matrix(size(), columns.size());
  for (std::size_t c : columns) {
    if (c >= dims()) throw DimensionError("feature index out of range");
    out.feature_names.push_back(feature_names[c]);
  }
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) out.features(r, j) = features(r, columns[j]);
  }
  return out;
}

Dataset Dataset::select_features(std::span<const std::string> names) const {
  std::vector<std::size_t> columns;
  columns.reserve(names.size());
  for (const auto& name : names) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
      throw DataError(DataIssue::missing_column, "feature '" + name + "' is not in the dataset");
    }
    columns.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  return select_features(std::span<const std::size_t>(columns));
}

void require_both_classes(std::span<const int> labels, const char* context) {
  bool seen[2] = {false, false};
  for (int label : labels) {
    if (label == 0 || label == 1) seen[label] = true;
  }
  if (!seen[0] || !seen[1]) {
    throw DataError(DataIssue::degenerate_labels,
                    std::string(context) + ": both classes must be present");
  }
}

}  // namespace attnfuse
