#include "attnfuse/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <vector>

#include "attnfuse/error.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ec == std::errc() ? ptr : buffer);
}

Dataset read_dataset_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(DataIssue::empty_input, "cannot open dataset '" + path.string() + "'");
  }
  return read_dataset_csv(in, schema);
}

Dataset read_dataset_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError(DataIssue::empty_input, "dataset is empty (no header row)");
  }
  const auto header = split_csv_line(line);
  std::vector<std::string> names;
  for (auto cell : header) names.emplace_back(trim(cell));

  const auto label_it = std::find(names.begin(), names.end(), schema.label_column);
  if (label_it == names.end()) {
    throw DataError(DataIssue::missing_column,
                    "header has no label column '" + schema.label_column + "'");
  }
  const auto label_col = static_cast<std::size_t>(label_it - names.begin());
  const auto id_it = std::find(names.begin(), names.end(), schema.id_column);
  const std::size_t id_col =
      id_it == names.end() ? names.size() : static_cast<std::size_t>(id_it - names.begin());

  Dataset data;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c == label_col || c == id_col) continue;
    feature_cols.push_back(c);
    data.feature_names.push_back(names[c]);
  }

  std::vector<double> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != names.size()) {
      throw DataError(DataIssue::dimension, "row " + std::to_string(row) + ": expected " +
                                                std::to_string(names.size()) + " cells, found " +
                                                std::to_string(fields.size()));
    }
    for (std::size_t c : feature_cols) {
      double value = 0.0;
      if (!parse_double(fields[c], value)) {
        throw DataError(DataIssue::non_numeric, "row " + std::to_string(row) + ", column '" +
                                                    names[c] + "': '" + std::string(fields[c]) +
                                                    "' is not numeric");
      }
      if (!std::isfinite(value)) {
        throw DataError(DataIssue::non_finite,
                        "row " + std::to_string(row) + ", column '" + names[c] + "': not finite");
      }
      cells.push_back(value);
    }
    double label = 0.0;
    if (!parse_double(fields[label_col], label)) {
      throw DataError(DataIssue::non_numeric, "row " + std::to_string(row) + ", column '" +
                                                  schema.label_column + "': '" +
                                                  std::string(fields[label_col]) + "' is not numeric");
    }
    if (label != 0.0 && label != 1.0) {
      throw DataError(DataIssue::label_domain, "row " + std::to_string(row) + ", column '" +
                                                   schema.label_column + "': label " +
                                                   std::string(trim(fields[label_col])) +
                                                   " is not 0 or 1");
    }
    data.labels.push_back(static_cast<int>(label));
  }
  if (data.labels.empty()) throw DataError(DataIssue::empty_input, "dataset has no data rows");

  data.features = Matrix(data.labels.size(), feature_cols.size());
  std::copy(cells.begin(), cells.end(), data.features.row(0).begin());
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "id";
  for (const auto& name : data.feature_names) out << ',' << name;
  out << ",Class\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << r;
    for (double value : data.features.row(r)) out << ',' << format_double(value);
    out << ',' << data.labels[r] << '\n';
  }
}

Dataset make_synthetic(const SynthConfig& config) {
  if (config.n_samples < 10) throw ConfigError("synth needs at least 10 samples");
  if (config.n_informative + config.n_noise == 0) throw ConfigError("synth needs at least one feature");
  if (!std::isfinite(config.class_separation) || config.class_separation < 0.0) {
    throw ConfigError("class separation must be a finite nonnegative number");
  }

  Rng rng(config.seed);
  const std::size_t dims = config.n_informative + config.n_noise;
  Dataset data;
  for (std::size_t j = 0; j < dims; ++j) data.feature_names.push_back("V" + std::to_string(j + 1));

  data.labels.resize(config.n_samples);
  for (std::size_t i = 0; i < config.n_samples; ++i) data.labels[i] = static_cast<int>(i % 2);
  rng.shuffle(std::span(data.labels));

  data.features = Matrix(config.n_samples, dims);
  const double half = 0.5 * config.class_separation;
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    const double offset = data.labels[i] == 1 ? half : -half;
    for (std::size_t j = 0; j < dims; ++j) {
      data.features(i, j) = rng.normal() + (j < config.n_informative ? offset : 0.0);
    }
  }
  return data;
}

}  // namespace attnfuse
