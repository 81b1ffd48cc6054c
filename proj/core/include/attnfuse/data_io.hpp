#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "attnfuse/dataset.hpp"

namespace attnfuse {

struct CsvSchema {
  std::string label_column = "Class";
  /// Dropped from the features when present.
  std::string id_column = "id";
};

/// Parses a header row followed by numeric rows. Every column other than the
/// id and label columns becomes a feature. Throws DataError with row and
/// column context for an empty file, a missing label column, non-numeric or
/// non-finite cells and labels outside {0, 1}.
Dataset read_dataset_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset read_dataset_csv(std::istream& in, const CsvSchema& schema = {});

/// Writes id, the feature columns and Class, in that order.
void write_dataset_csv(std::ostream& out, const Dataset& data);

struct SynthConfig {
  std::size_t n_samples = 5000;
  std::size_t n_informative = 5;
  std::size_t n_noise = 15;
  /// Distance between the class means along every informative axis.
  double class_separation = 2.0;
  std::uint64_t seed = 0;
};

/// Two-class Gaussian mixture with exactly balanced (up to one sample)
/// classes. Informative features V1..Vk carry class means at -sep/2 and
/// +sep/2; the remaining features are standard normal noise.
Dataset make_synthetic(const SynthConfig& config);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace attnfuse
