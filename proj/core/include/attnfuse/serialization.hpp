#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "attnfuse/ensemble.hpp"
#include "attnfuse/pipeline.hpp"
#include "attnfuse/screening.hpp"

namespace attnfuse {

using Json = nlohmann::ordered_json;

/// {threshold, features: [{name, contribution_percent}], retained: [names]}
Json to_json(const ScreeningReport& report);
ScreeningReport screening_report_from_json(const Json& doc);

Json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const Json& doc);

/// Keys present in doc override the corresponding fields of base. Unknown
/// keys and ill-typed values throw ConfigError.
RunConfig run_config_from_json(const Json& doc, RunConfig base = {});
Json to_json(const RunConfig& config);

/// The trained ensemble as saved by the train command.
struct EnsembleArtifact {
  RunConfig config;
  std::vector<ClassifierSpec> learners;
  double screening_threshold = 0.5;
  std::vector<std::string> retained_features;
  /// Path of the screening report written alongside, relative to the artifact.
  std::string screening_report;
  FusionStack stack;
};

Json to_json(const EnsembleArtifact& artifact);
/// Throws ConfigError when required fields are missing or malformed.
EnsembleArtifact artifact_from_json(const Json& doc);

/// Metrics document. timestamp, when given, is the only entry of the
/// top-level "metadata" object; everything else is a pure function of the
/// inputs.
Json metrics_to_json(const MetricsReport& report, const RunConfig& config,
                     const std::optional<std::string>& timestamp = std::nullopt);

/// Human-readable summary of a metrics document.
std::string render_metrics_text(const Json& metrics);

/// Parses a JSON file, mapping I/O and syntax failures to ConfigError.
Json read_json_file(const std::filesystem::path& path);

}  // namespace attnfuse
