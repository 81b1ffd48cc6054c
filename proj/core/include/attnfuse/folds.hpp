#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace attnfuse {

/// Fold index in [0, k) for every sample. Each class is shuffled with the
/// seed and dealt round-robin, continuing the deal across classes so fold
/// sizes differ by at most one. Throws DataError(stratification) when a
/// class has fewer than k members, since some fold would then miss it.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

FoldSplit split_for_fold(std::span<const int> folds, int fold);

}  // namespace attnfuse
