#include "attnfuse/learners.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "attnfuse/error.hpp"
#include "attnfuse/random.hpp"

namespace attnfuse {

namespace {

constexpr std::array kRoster = {LearnerKind::boosted_trees, LearnerKind::sgd,
                                LearnerKind::extra_trees,   LearnerKind::adaboost,
                                LearnerKind::svm,           LearnerKind::mlp};

/// Reads typed hyperparameters and rejects keys nobody asked for.
class HyperReader {
 public:
  explicit HyperReader(const ClassifierSpec& spec) : spec_(spec) {}

  double real(const std::string& key, double fallback, double lo, double hi) {
    used_.insert(key);
    const auto it = spec_.hyperparameters.find(key);
    if (it == spec_.hyperparameters.end()) return fallback;
    const double v = it->second;
    if (!std::isfinite(v) || v < lo || v > hi) {
      throw ConfigError(std::string(long_name(spec_.kind)) + ": hyperparameter '" + key +
                        "' is out of range");
    }
    return v;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const double v = real(key, fallback, lo, hi);
    if (v != std::floor(v)) {
      throw ConfigError(std::string(long_name(spec_.kind)) + ": hyperparameter '" + key +
                        "' must be an integer");
    }
    return static_cast<int>(v);
  }

  void finish() const {
    for (const auto& [key, value] : spec_.hyperparameters) {
      if (!used_.contains(key)) {
        throw ConfigError(std::string(long_name(spec_.kind)) + ": unknown hyperparameter '" +
                          key + "'");
      }
    }
  }

 private:
  const ClassifierSpec& spec_;
  std::set<std::string> used_;
};

constexpr double kHuge = 1e9;

}  // namespace

std::string_view short_name(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::boosted_trees: return "bt";
    case LearnerKind::sgd: return "sgd";
    case LearnerKind::extra_trees: return "et";
    case LearnerKind::adaboost: return "ab";
    case LearnerKind::svm: return "svm";
    case LearnerKind::mlp: return "mlp";
  }
  return "?";
}

std::string_view long_name(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::boosted_trees: return "boosted_trees";
    case LearnerKind::sgd: return "sgd";
    case LearnerKind::extra_trees: return "extra_trees";
    case LearnerKind::adaboost: return "adaboost";
    case LearnerKind::svm: return "svm";
    case LearnerKind::mlp: return "mlp";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto kind : kRoster) {
    if (lowered == short_name(kind) || lowered == long_name(kind)) return kind;
  }
  throw ConfigError("unknown learner kind '" + std::string(text) + "'");
}

std::vector<ClassifierSpec> default_roster(std::uint64_t seed) {
  std::vector<ClassifierSpec> specs;
  for (std::size_t i = 0; i < kRoster.size(); ++i) {
    specs.push_back({kRoster[i], {}, mix_seed(seed, i)});
  }
  return specs;
}

std::unique_ptr<ProbabilisticClassifier> build(const ClassifierSpec& spec) {
  HyperReader hp(spec);
  std::unique_ptr<ProbabilisticClassifier> learner;
  switch (spec.kind) {
    case LearnerKind::sgd: {
      SgdClassifier::Params p;
      p.learning_rate = hp.real("learning_rate", p.learning_rate, 1e-12, 10.0);
      p.epochs = hp.integer("epochs", p.epochs, 1, 100000);
      p.l2 = hp.real("l2", p.l2, 0.0, kHuge);
      learner = std::make_unique<SgdClassifier>(p, spec.seed);
      break;
    }
    case LearnerKind::svm: {
      LinearSvmClassifier::Params p;
      p.learning_rate = hp.real("learning_rate", p.learning_rate, 1e-12, 10.0);
      p.epochs = hp.integer("epochs", p.epochs, 1, 100000);
      p.lambda = hp.real("lambda", p.lambda, 0.0, kHuge);
      learner = std::make_unique<LinearSvmClassifier>(p, spec.seed);
      break;
    }
    case LearnerKind::mlp: {
      MlpClassifier::Params p;
      p.hidden_units = hp.integer("hidden_units", p.hidden_units, 1, 100000);
      p.learning_rate = hp.real("learning_rate", p.learning_rate, 1e-12, 10.0);
      p.momentum = hp.real("momentum", p.momentum, 0.0, 0.999999);
      p.epochs = hp.integer("epochs", p.epochs, 1, 100000);
      p.batch_size = hp.integer("batch_size", p.batch_size, 1, 1 << 24);
      learner = std::make_unique<MlpClassifier>(p, spec.seed);
      break;
    }
    case LearnerKind::extra_trees: {
      ExtraTreesClassifier::Params p;
      p.n_trees = hp.integer("n_trees", p.n_trees, 1, 100000);
      p.max_depth = hp.integer("max_depth", p.max_depth, 1, 1000);
      p.min_samples_split = hp.integer("min_samples_split", p.min_samples_split, 2, 1 << 30);
      p.features_per_split = hp.integer("features_per_split", p.features_per_split, 0, 1 << 20);
      learner = std::make_unique<ExtraTreesClassifier>(p, spec.seed);
      break;
    }
    case LearnerKind::adaboost: {
      AdaBoostClassifier::Params p;
      p.n_estimators = hp.integer("n_estimators", p.n_estimators, 1, 100000);
      learner = std::make_unique<AdaBoostClassifier>(p, spec.seed);
      break;
    }
    case LearnerKind::boosted_trees: {
      BoostedTreesClassifier::Params p;
      p.n_trees = hp.integer("n_trees", p.n_trees, 1, 100000);
      p.max_depth = hp.integer("max_depth", p.max_depth, 1, 64);
      p.shrinkage = hp.real("shrinkage", p.shrinkage, 1e-12, 1.0);
      p.min_samples_split = hp.integer("min_samples_split", p.min_samples_split, 2, 1 << 30);
      learner = std::make_unique<BoostedTreesClassifier>(p, spec.seed);
      break;
    }
  }
  hp.finish();
  return learner;
}

void Standardizer::fit(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  if (n == 0) return;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) mean_[c] += x(r, c);
  }
  for (auto& m : mean_) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) var[c] += (x(r, c) - mean_[c]) * (x(r, c) - mean_[c]);
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(n));
    scale_[c] = sd > 0.0 ? sd : 1.0;
  }
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
  if (in.size() != mean_.size()) throw DimensionError("standardizer: column count mismatch");
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - mean_[c]) / scale_[c];
}

Matrix Standardizer::transform(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) transform_row(x.row(r), out.row(r));
  return out;
}

}  // namespace attnfuse
