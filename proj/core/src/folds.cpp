#include "attnfuse/folds.hpp"

#include <string>

#include "attnfuse/error.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError(DataIssue::label_domain, "label at row " + std::to_string(i) + " is not 0 or 1");
    }
    members[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (members[c].size() < static_cast<std::size_t>(k)) {
      throw DataError(DataIssue::stratification,
                      "class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                          " samples, fewer than the " + std::to_string(k) +
                          " folds; some fold would lack that class");
    }
  }

  Rng rng(seed);
  std::vector<int> folds(labels.size(), -1);
  std::size_t dealt = 0;
  for (auto& group : members) {
    rng.shuffle(std::span(group));
    for (std::size_t idx : group) folds[idx] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return folds;
}

FoldSplit split_for_fold(std::span<const int> folds, int fold) {
  FoldSplit split;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    (folds[i] == fold ? split.test : split.train).push_back(i);
  }
  return split;
}

}  // namespace attnfuse
