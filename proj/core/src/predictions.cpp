#include "attnfuse/predictions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"
#include "attnfuse/folds.hpp"
#include "attnfuse/parallel.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_number(const std::string& text, std::size_t row, const std::string& column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(DataIssue::non_numeric, "prediction row " + std::to_string(row) + ", column '" +
                                                column + "': '" + text + "' is not numeric");
  }
  return value;
}

}  // namespace

std::vector<double> PredictionMatrix::column(std::size_t learner, int cls) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = p(i, learner, cls);
  return out;
}

std::optional<std::size_t> PredictionMatrix::learner_index(std::string_view name) const {
  const auto it = std::find(learners.begin(), learners.end(), name);
  if (it == learners.end()) return std::nullopt;
  return static_cast<std::size_t>(it - learners.begin());
}

void PredictionMatrix::validate() const {
  const std::size_t n = size();
  if (sample_ids.size() != n || folds.size() != n || probabilities.rows() != n ||
      probabilities.cols() != 2 * learners.size()) {
    throw DimensionError("prediction matrix shape is inconsistent");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError(DataIssue::label_domain, "prediction row " + std::to_string(i) +
                                                   ": true_class is not 0 or 1");
    }
    for (std::size_t l = 0; l < learners.size(); ++l) {
      const double p0 = p(i, l, 0);
      const double p1 = p(i, l, 1);
      if (!std::isfinite(p0) || !std::isfinite(p1) || p0 < 0.0 || p1 < 0.0 || p0 > 1.0 ||
          p1 > 1.0 || std::abs(p0 + p1 - 1.0) > 1e-6) {
        throw DataError(DataIssue::non_finite, "prediction row " + std::to_string(i) + ", learner '" +
                                                   learners[l] + "': not a probability distribution");
      }
    }
  }
}

PredictionMatrix PredictionMatrix::subset(std::span<const std::size_t> rows) const {
  PredictionMatrix out;
  out.learners = learners;
  out.probabilities = Matrix(rows.size(), probabilities.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    out.sample_ids.push_back(sample_ids[r]);
    out.folds.push_back(folds[r]);
    out.labels.push_back(labels[r]);
    const auto src = probabilities.row(r);
    std::copy(src.begin(), src.end(), out.probabilities.row(i).begin());
  }
  return out;
}

void write_prediction_csv(std::ostream& out, const PredictionMatrix& preds) {
  out << "sample_id,fold,true_class";
  for (const auto& name : preds.learners) out << ',' << name << "_p0," << name << "_p1";
  out << '\n';
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out << preds.sample_ids[i] << ',' << preds.folds[i] << ',' << preds.labels[i];
    for (double v : preds.probabilities.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

PredictionMatrix read_prediction_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(DataIssue::empty_input, "cannot open prediction file '" + path.string() + "'");
  }
  return read_prediction_csv(in);
}

PredictionMatrix read_prediction_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw DataError(DataIssue::empty_input, "prediction file is empty");
  }
  const auto header = split(line);
  if (header.size() < 5 || header[0] != "sample_id" || header[1] != "fold" ||
      header[2] != "true_class" || (header.size() - 3) % 2 != 0) {
    throw DataError(DataIssue::missing_column,
                    "prediction header must be sample_id,fold,true_class,<learner>_p0,<learner>_p1,...");
  }
  PredictionMatrix preds;
  for (std::size_t c = 3; c < header.size(); c += 2) {
    const auto& a = header[c];
    const auto& b = header[c + 1];
    if (a.size() < 4 || a.substr(a.size() - 3) != "_p0" || b != a.substr(0, a.size() - 3) + "_p1") {
      throw DataError(DataIssue::missing_column,
                      "prediction columns '" + a + "', '" + b + "' are not a <learner>_p0/_p1 pair");
    }
    preds.learners.push_back(a.substr(0, a.size() - 3));
  }

  std::vector<double> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw DataError(DataIssue::dimension, "prediction row " + std::to_string(row) + ": expected " +
                                                std::to_string(header.size()) + " cells");
    }
    preds.sample_ids.push_back(parse_number<std::size_t>(fields[0], row, header[0]));
    preds.folds.push_back(parse_number<int>(fields[1], row, header[1]));
    preds.labels.push_back(parse_number<int>(fields[2], row, header[2]));
    for (std::size_t c = 3; c < fields.size(); ++c) {
      cells.push_back(parse_number<double>(fields[c], row, header[c]));
    }
  }
  if (preds.labels.empty()) throw DataError(DataIssue::empty_input, "prediction file has no rows");
  preds.probabilities = Matrix(preds.labels.size(), 2 * preds.learners.size());
  std::copy(cells.begin(), cells.end(), preds.probabilities.row(0).begin());
  preds.validate();
  return preds;
}

OutOfFoldResult fit_predict_out_of_fold(const std::vector<ClassifierSpec>& specs,
                                        const Dataset& data, int k_folds, std::uint64_t seed) {
  if (specs.empty()) throw ConfigError("no first-layer learners configured");
  data.validate();
  const auto folds = stratified_folds(data.labels, k_folds, seed);

  // Build every learner up front so configuration errors surface before any work.
  for (const auto& spec : specs) (void)build(spec);

  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(k_folds);
  std::vector<FoldSplit> splits;
  for (std::size_t f = 0; f < k; ++f) splits.push_back(split_for_fold(folds, static_cast<int>(f)));

  OutOfFoldResult result;
  auto& preds = result.predictions;
  for (const auto& spec : specs) preds.learners.push_back(spec.name());
  preds.sample_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) preds.sample_ids[i] = i;
  preds.folds = folds;
  preds.labels = data.labels;
  preds.probabilities = Matrix(n, 2 * specs.size());

  std::vector<FoldProvenance> provenance(specs.size() * k);
  parallel_for(specs.size() * k, [&](std::size_t job) {
    const std::size_t l = job / k;
    const std::size_t f = job % k;
    const auto& split = splits[f];
    auto learner = build(specs[l]);
    learner->fit(data.subset(split.train));
    const auto test = data.subset(split.test);
    const Matrix proba = learner->predict_proba(test.features);
    for (std::size_t t = 0; t < split.test.size(); ++t) {
      preds.probabilities(split.test[t], 2 * l) = proba(t, 0);
      preds.probabilities(split.test[t], 2 * l + 1) = proba(t, 1);
    }
    provenance[job] = {"first_layer", specs[l].name(), static_cast<int>(f), split.train};
  });
  result.provenance = std::move(provenance);
  preds.validate();
  return result;
}

std::vector<std::string> find_leakage(std::span<const int> folds,
                                      std::span<const FoldProvenance> provenance) {
  std::vector<std::string> problems;
  for (const auto& record : provenance) {
    for (std::size_t row : record.training_rows) {
      if (row >= folds.size() || folds[row] == record.fold) {
        problems.push_back(record.stage + "/" + record.component + " fold " +
                           std::to_string(record.fold) + " trained on row " + std::to_string(row) +
                           " from its own held-out fold");
        break;
      }
    }
  }
  return problems;
}

double learner_accuracy(const PredictionMatrix& preds, std::size_t learner) {
  if (preds.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int predicted = preds.p(i, learner, 1) >= preds.p(i, learner, 0) ? 1 : 0;
    if (predicted == preds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace attnfuse
