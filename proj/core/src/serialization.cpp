#include "attnfuse/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "attnfuse/error.hpp"

namespace attnfuse {

namespace {

template <typename T>
T field(const Json& doc, const char* key, const char* context) {
  if (!doc.contains(key)) throw ConfigError(std::string(context) + ": missing '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(context) + ": '" + key + "' has the wrong type");
  }
}

template <typename T>
void maybe(const Json& doc, const char* key, T& target, const char* context) {
  if (doc.contains(key) && !doc.at(key).is_null()) target = field<T>(doc, key, context);
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> known, const char* context) {
  if (!doc.is_object()) throw ConfigError(std::string(context) + " must be a JSON object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
  }
}

Json counts_json(const ConfusionCounts& c) {
  return Json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

void put_scalar_metrics(Json& out, const ScalarMetrics& m) {
  out["precision"] = m.precision;
  out["specificity"] = m.specificity;
  out["accuracy"] = m.accuracy;
  out["sensitivity"] = m.sensitivity;
  out["mcc"] = m.mcc;
  out["f1"] = m.f1;
  out["degenerate"] = m.degenerate;
}

Json iowa_json(const owa::IowaModel& model) {
  return Json{{"betas", model.betas},
              {"learning_rate", model.learning_rate},
              {"epochs_run", model.epochs_run},
              {"final_mean_error", model.final_mean_error}};
}

owa::IowaModel iowa_from_json(const Json& doc) {
  owa::IowaModel model;
  model.betas = field<std::vector<double>>(doc, "betas", "iowa model");
  maybe(doc, "learning_rate", model.learning_rate, "iowa model");
  maybe(doc, "epochs_run", model.epochs_run, "iowa model");
  maybe(doc, "final_mean_error", model.final_mean_error, "iowa model");
  return model;
}

Json groups_json(const std::optional<GroupOverride>& groups) {
  if (!groups) return nullptr;
  Json out{{"dowa", groups->dowa}};
  if (!groups->iowa.empty()) out["iowa"] = groups->iowa;
  return out;
}

}  // namespace

Json to_json(const ScreeningReport& report) {
  Json features = Json::array();
  for (const auto& c : report.contributions) {
    features.push_back(Json{{"name", c.name}, {"contribution_percent", c.percent}});
  }
  return Json{{"threshold", report.threshold_percent},
              {"features", features},
              {"retained", report.retained}};
}

ScreeningReport screening_report_from_json(const Json& doc) {
  ScreeningReport report;
  report.threshold_percent = field<double>(doc, "threshold", "screening report");
  for (const auto& f : field<Json>(doc, "features", "screening report")) {
    report.contributions.push_back({field<std::string>(f, "name", "screening feature"),
                                    field<double>(f, "contribution_percent", "screening feature")});
  }
  report.retained = field<std::vector<std::string>>(doc, "retained", "screening report");
  return report;
}

Json to_json(const ClassifierSpec& spec) {
  Json hp = Json::object();
  for (const auto& [key, value] : spec.hyperparameters) hp[key] = value;
  return Json{{"kind", long_name(spec.kind)}, {"seed", spec.seed}, {"hyperparameters", hp}};
}

ClassifierSpec classifier_spec_from_json(const Json& doc) {
  reject_unknown(doc, {"kind", "seed", "hyperparameters"}, "learner spec");
  ClassifierSpec spec;
  spec.kind = parse_learner_kind(field<std::string>(doc, "kind", "learner spec"));
  maybe(doc, "seed", spec.seed, "learner spec");
  if (doc.contains("hyperparameters")) {
    spec.hyperparameters = field<std::map<std::string, double>>(doc, "hyperparameters", "learner spec");
  }
  (void)build(spec);  // validates hyperparameters
  return spec;
}

RunConfig run_config_from_json(const Json& doc, RunConfig config) {
  reject_unknown(doc,
                 {"data", "label", "threshold", "folds", "seed", "forest", "learners", "iowa",
                  "ridge_lambda", "groups"},
                 "run config");
  maybe(doc, "data", config.data_path, "run config");
  maybe(doc, "label", config.label_column, "run config");
  maybe(doc, "threshold", config.screening_threshold, "run config");
  maybe(doc, "folds", config.folds, "run config");
  maybe(doc, "seed", config.seed, "run config");
  maybe(doc, "ridge_lambda", config.ridge_lambda, "run config");
  if (doc.contains("forest")) {
    const auto& f = doc.at("forest");
    reject_unknown(f, {"n_trees", "max_depth", "min_samples_split", "features_per_split"}, "forest");
    maybe(f, "n_trees", config.forest.n_trees, "forest");
    maybe(f, "max_depth", config.forest.max_depth, "forest");
    maybe(f, "min_samples_split", config.forest.min_samples_split, "forest");
    maybe(f, "features_per_split", config.forest.features_per_split, "forest");
  }
  if (doc.contains("iowa")) {
    const auto& i = doc.at("iowa");
    reject_unknown(i, {"learning_rate", "max_epochs", "tolerance"}, "iowa");
    maybe(i, "learning_rate", config.iowa.learning_rate, "iowa");
    maybe(i, "max_epochs", config.iowa.max_epochs, "iowa");
    maybe(i, "tolerance", config.iowa.tolerance, "iowa");
  }
  if (doc.contains("learners") && !doc.at("learners").is_null()) {
    if (!doc.at("learners").is_array()) throw ConfigError("run config: 'learners' must be an array");
    config.learners.clear();
    for (const auto& l : doc.at("learners")) config.learners.push_back(classifier_spec_from_json(l));
  }
  if (doc.contains("groups")) {
    const auto& g = doc.at("groups");
    if (g.is_null()) {
      config.groups.reset();
    } else if (g.is_string()) {
      config.groups = parse_group_override(g.get<std::string>());
    } else {
      reject_unknown(g, {"dowa", "iowa"}, "groups");
      GroupOverride groups;
      groups.dowa = field<std::vector<std::string>>(g, "dowa", "groups");
      maybe(g, "iowa", groups.iowa, "groups");
      config.groups = groups;
    }
  }
  if (config.folds < 2) throw ConfigError("run config: folds must be at least 2");
  if (!(config.screening_threshold >= 0.0 && config.screening_threshold <= 100.0)) {
    throw ConfigError("run config: threshold must lie in [0, 100]");
  }
  if (!(config.ridge_lambda > 0.0)) throw ConfigError("run config: ridge_lambda must be positive");
  return config;
}

Json to_json(const RunConfig& config) {
  Json learners = Json::array();
  for (const auto& spec : config.learners) learners.push_back(to_json(spec));
  return Json{{"data", config.data_path},
              {"label", config.label_column},
              {"threshold", config.screening_threshold},
              {"folds", config.folds},
              {"seed", config.seed},
              {"forest",
               {{"n_trees", config.forest.n_trees},
                {"max_depth", config.forest.max_depth},
                {"min_samples_split", config.forest.min_samples_split},
                {"features_per_split", config.forest.features_per_split}}},
              {"learners", learners},
              {"iowa",
               {{"learning_rate", config.iowa.learning_rate},
                {"max_epochs", config.iowa.max_epochs},
                {"tolerance", config.iowa.tolerance}}},
              {"ridge_lambda", config.ridge_lambda},
              {"groups", groups_json(config.groups)}};
}

Json to_json(const EnsembleArtifact& artifact) {
  Json learners = Json::array();
  for (const auto& spec : artifact.learners) learners.push_back(to_json(spec));
  const auto& plan = artifact.stack.plan;
  Json correlations = Json::array();
  for (std::size_t r = 0; r < plan.correlations.rows(); ++r) {
    const auto row = plan.correlations.row(r);
    correlations.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return Json{
      {"format", "attnfuse-ensemble"},
      {"version", 1},
      {"config", to_json(artifact.config)},
      {"learners", learners},
      {"screening",
       {{"threshold", artifact.screening_threshold},
        {"retained", artifact.retained_features},
        {"report", artifact.screening_report}}},
      {"grouping",
       {{"learners", plan.learners},
        {"dowa", plan.dowa_names()},
        {"iowa", plan.iowa_names()},
        {"correlations", correlations}}},
      {"iowa", {{"class0", iowa_json(artifact.stack.iowa_class0)}, {"class1", iowa_json(artifact.stack.iowa_class1)}}},
      {"ridge",
       {{"coefficients", artifact.stack.ridge.coefficients},
        {"bias", artifact.stack.ridge.bias},
        {"lambda", artifact.stack.ridge.ridge_lambda}}}};
}

EnsembleArtifact artifact_from_json(const Json& doc) {
  if (!doc.is_object() || doc.value("format", std::string()) != "attnfuse-ensemble") {
    throw ConfigError("not an attnfuse ensemble artifact");
  }
  EnsembleArtifact artifact;
  if (doc.contains("config")) artifact.config = run_config_from_json(doc.at("config"));
  if (doc.contains("learners")) {
    for (const auto& l : doc.at("learners")) artifact.learners.push_back(classifier_spec_from_json(l));
  }
  if (doc.contains("screening")) {
    const auto& s = doc.at("screening");
    maybe(s, "threshold", artifact.screening_threshold, "screening");
    maybe(s, "retained", artifact.retained_features, "screening");
    maybe(s, "report", artifact.screening_report, "screening");
  }

  const auto grouping = field<Json>(doc, "grouping", "artifact");
  const auto dowa = field<std::vector<std::string>>(grouping, "dowa", "grouping");
  const auto iowa = field<std::vector<std::string>>(grouping, "iowa", "grouping");
  auto names = dowa;
  names.insert(names.end(), iowa.begin(), iowa.end());
  if (grouping.contains("learners")) names = field<std::vector<std::string>>(grouping, "learners", "grouping");
  Matrix correlations(names.size(), names.size(), 0.0);
  for (std::size_t i = 0; i < names.size(); ++i) correlations(i, i) = 1.0;
  if (grouping.contains("correlations")) {
    const auto rows = field<std::vector<std::vector<double>>>(grouping, "correlations", "grouping");
    if (rows.size() != names.size()) throw ConfigError("grouping: correlation matrix has the wrong size");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != names.size()) throw ConfigError("grouping: correlation matrix has the wrong size");
      for (std::size_t c = 0; c < rows[r].size(); ++c) correlations(r, c) = rows[r][c];
    }
  }
  artifact.stack.plan = plan_grouping(correlations, names, GroupOverride{dowa, iowa});

  const auto iowa_models = field<Json>(doc, "iowa", "artifact");
  artifact.stack.iowa_class0 = iowa_from_json(field<Json>(iowa_models, "class0", "iowa"));
  artifact.stack.iowa_class1 = iowa_from_json(field<Json>(iowa_models, "class1", "iowa"));
  for (const auto* model : {&artifact.stack.iowa_class0, &artifact.stack.iowa_class1}) {
    if (model->betas.size() != 3) throw ConfigError("iowa: models must have three parameters");
    (void)owa::softmax(model->betas);  // rejects non-finite parameters
  }

  const auto ridge = field<Json>(doc, "ridge", "artifact");
  const auto coefficients = field<std::vector<double>>(ridge, "coefficients", "ridge");
  if (coefficients.size() != 2) throw ConfigError("ridge: expected two coefficients");
  artifact.stack.ridge.coefficients = {coefficients[0], coefficients[1]};
  artifact.stack.ridge.bias = field<double>(ridge, "bias", "ridge");
  maybe(ridge, "lambda", artifact.stack.ridge.ridge_lambda, "ridge");
  return artifact;
}

Json metrics_to_json(const MetricsReport& report, const RunConfig& config,
                     const std::optional<std::string>& timestamp) {
  Json doc;
  if (timestamp) doc["metadata"] = Json{{"generated_at", *timestamp}};
  doc["seed"] = config.seed;
  doc["config"] = to_json(config);

  Json pooled{{"confusion", counts_json(report.pooled_counts)}};
  put_scalar_metrics(pooled, report.pooled);
  pooled["auc"] = report.roc.auc;
  pooled["roc_points"] = report.roc.points.size();
  doc["pooled"] = pooled;

  Json summary = Json::object();
  for (const auto& [name, s] : report.summary) summary[name] = Json{{"mean", s.mean}, {"std", s.std}};
  doc["summary"] = summary;
  doc["summary_std"] = "sample standard deviation of the per-fold values";

  Json folds = Json::array();
  for (const auto& f : report.per_fold) {
    Json fold{{"fold", f.fold}, {"confusion", counts_json(f.counts)}};
    put_scalar_metrics(fold, f.metrics);
    fold["auc"] = f.auc;
    fold["dowa_fraction"] = f.dowa_fraction;
    fold["dowa_group"] = f.dowa_group;
    fold["iowa_group"] = f.iowa_group;
    folds.push_back(fold);
  }
  doc["per_fold"] = folds;

  Json first_layer = Json::object();
  for (const auto& [name, acc] : report.first_layer_accuracy) first_layer[name] = acc;
  doc["first_layer_accuracy"] = first_layer;
  doc["selection"] = Json{{"dowa_fraction", report.dowa_fraction}, {"iowa_fraction", report.iowa_fraction}};
  doc["notes"] = Json::array(
      {"predictor screening is fitted on the full dataset before cross-validation, so the "
       "retained feature set has seen every row",
       "first-layer probabilities are out-of-fold; grouping, IOWA weights and the ridge model "
       "are refitted inside each fusion fold"});
  return doc;
}

std::string render_metrics_text(const Json& metrics) {
  std::ostringstream out;
  char line[160];
  auto number = [](const Json& v) { return v.is_number() ? v.get<double>() : 0.0; };

  out << "Ensemble evaluation";
  if (metrics.contains("seed")) out << " (seed " << metrics["seed"].dump() << ")";
  out << "\n\n";
  if (metrics.contains("pooled")) {
    const auto& p = metrics["pooled"];
    out << "Pooled held-out metrics\n";
    for (const char* name : {"accuracy", "precision", "sensitivity", "specificity", "f1", "mcc", "auc"}) {
      if (!p.contains(name)) continue;
      std::snprintf(line, sizeof(line), "  %-12s %8.4f%%\n", name, 100.0 * number(p[name]));
      out << line;
    }
    if (p.contains("confusion")) {
      const auto& c = p["confusion"];
      out << "  confusion    TP " << c.value("tp", 0) << "  FP " << c.value("fp", 0) << "  TN "
          << c.value("tn", 0) << "  FN " << c.value("fn", 0) << "\n";
    }
    out << "\n";
  }
  if (metrics.contains("summary")) {
    out << "Per-fold mean +/- sample std\n";
    for (const auto& [name, s] : metrics["summary"].items()) {
      std::snprintf(line, sizeof(line), "  %-12s %8.4f%% +/- %.4f%%\n", name.c_str(),
                    100.0 * number(s["mean"]), 100.0 * number(s["std"]));
      out << line;
    }
    out << "\n";
  }
  if (metrics.contains("first_layer_accuracy")) {
    out << "First-layer out-of-fold accuracy\n";
    for (const auto& [name, acc] : metrics["first_layer_accuracy"].items()) {
      std::snprintf(line, sizeof(line), "  %-12s %8.4f%%\n", name.c_str(), 100.0 * number(acc));
      out << line;
    }
    out << "\n";
  }
  if (metrics.contains("selection")) {
    const auto& s = metrics["selection"];
    std::snprintf(line, sizeof(line), "Selection layer: DOWA %.2f%%, IOWA %.2f%%\n",
                  100.0 * number(s["dowa_fraction"]), 100.0 * number(s["iowa_fraction"]));
    out << line;
  }
  if (metrics.contains("notes")) {
    out << "\nNotes\n";
    for (const auto& note : metrics["notes"]) out << "  - " << note.get<std::string>() << "\n";
  }
  return out.str();
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace attnfuse
