#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attnfuse/matrix.hpp"

namespace attnfuse {

/// Feature matrix with binary labels (0 = legitimate, 1 = positive class).
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return feature_names.size(); }

  /// Throws DataError on shape mismatch, non-finite cells or labels outside {0, 1}.
  void validate() const;

  std::size_t count_positive() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset select_features(std::span<const std::size_t> columns) const;
  /// Throws DataError if a name is not a feature of this dataset.
  Dataset select_features(std::span<const std::string> names) const;
};

/// Throws DataError(degenerate_labels) unless both classes occur.
void require_both_classes(std::span<const int> labels, const char* context);

}  // namespace attnfuse
