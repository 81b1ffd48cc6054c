// attnfuse command-line tool: synth, screen, train, evaluate, fuse, report.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "attnfuse/data_io.hpp"
#include "attnfuse/error.hpp"
#include "attnfuse/pipeline.hpp"
#include "attnfuse/serialization.hpp"
#include "attnfuse/stats.hpp"

namespace fs = std::filesystem;
using namespace attnfuse;

namespace {

constexpr int kExitFailure = 1;

struct CommonFlags {
  std::string data;
  std::string label;
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<double> threshold;
  std::string groups;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--data", flags.data, "Input dataset CSV");
  cmd->add_option("--label", flags.label, "Label column (default Class)");
  cmd->add_option("--config", flags.config, "JSON run configuration");
  cmd->add_option("--out-dir", flags.out_dir, "Output directory");
  cmd->add_option("--seed", flags.seed, "Master seed");
  cmd->add_option("--folds", flags.folds, "Cross-validation folds");
  cmd->add_option("--threshold", flags.threshold, "Screening threshold in percent");
  cmd->add_option("--groups", flags.groups, "Comma-separated DOWA group, e.g. bt,et,ab");
}

RunConfig apply_flags(RunConfig config, const CommonFlags& flags) {
  if (!flags.config.empty()) config = run_config_from_json(read_json_file(flags.config), config);
  if (!flags.data.empty()) config.data_path = flags.data;
  if (!flags.label.empty()) config.label_column = flags.label;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.folds) config.folds = *flags.folds;
  if (flags.threshold) config.screening_threshold = *flags.threshold;
  if (!flags.groups.empty()) config.groups = parse_group_override(flags.groups);
  // Re-validate the merged result.
  return run_config_from_json(Json::object(), config);
}

Dataset load(const RunConfig& config) {
  if (config.data_path.empty()) throw ConfigError("no dataset given (use --data)");
  CsvSchema schema;
  schema.label_column = config.label_column;
  return read_dataset_csv(config.data_path, schema);
}

fs::path output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const Json& doc) {
  write_file(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_correlations(std::ostream& out, const Dataset& data) {
  const auto corr = column_correlations(data.features);
  out << "feature";
  for (const auto& name : data.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < data.feature_names.size(); ++r) {
    out << data.feature_names[r];
    for (std::size_t c = 0; c < data.feature_names.size(); ++c) out << ',' << format_double(corr.values(r, c));
    out << '\n';
  }
}

void write_screening(const fs::path& dir, const ScreeningReport& report) {
  write_json(dir / "screening.json", to_json(report));
  write_file(dir / "contributions.csv", [&](std::ostream& out) { write_contributions_csv(out, report); });
}

EnsembleArtifact load_artifact(const std::string& path) {
  if (path.empty()) throw ConfigError("no artifact given (use --artifact)");
  if (!fs::exists(path)) throw ConfigError("artifact '" + path + "' does not exist");
  return artifact_from_json(read_json_file(path));
}

void run_synth(const SynthConfig& config, const std::string& out_path) {
  const auto data = make_synthetic(config);
  if (out_path.empty() || out_path == "-") {
    write_dataset_csv(std::cout, data);
    return;
  }
  const auto parent = fs::path(out_path).parent_path();
  if (!parent.empty()) output_dir(parent.string());
  write_file(out_path, [&](std::ostream& out) { write_dataset_csv(out, data); });
}

void run_screen(const CommonFlags& flags) {
  const auto config = apply_flags({}, flags);
  const auto data = load(config);
  auto forest = config.forest;
  forest.seed = stage_seeds(config.seed).screening;
  const auto report = screen(data, forest, config.screening_threshold);
  const auto dir = output_dir(flags.out_dir);
  write_screening(dir, report);
  write_file(dir / "feature_correlation.csv", [&](std::ostream& out) { write_correlations(out, data); });
  std::cout << "retained " << report.retained.size() << " of " << report.contributions.size()
            << " features at " << config.screening_threshold << "%\n";
}

void run_train(const CommonFlags& flags) {
  const auto config = apply_flags({}, flags);
  const auto result = run_experiment(config, load(config));
  const auto dir = output_dir(flags.out_dir);

  EnsembleArtifact artifact;
  artifact.config = config;
  artifact.learners = result.learners;
  artifact.screening_threshold = config.screening_threshold;
  artifact.retained_features = result.screening.retained;
  artifact.screening_report = "screening.json";
  artifact.stack = result.final_stack;

  write_screening(dir, result.screening);
  write_file(dir / "predictions.csv",
             [&](std::ostream& out) { write_prediction_csv(out, result.first_layer.predictions); });
  write_json(dir / "ensemble.json", to_json(artifact));
  std::cout << "DOWA group " << Json(artifact.stack.plan.dowa_names()).dump() << ", IOWA group "
            << Json(artifact.stack.plan.iowa_names()).dump() << "\n"
            << "wrote " << (dir / "ensemble.json").string() << "\n";
}

void run_evaluate(const CommonFlags& flags, const std::string& artifact_path, bool timestamp) {
  const auto artifact = load_artifact(artifact_path);
  auto base = artifact.config;
  base.learners = artifact.learners;
  const auto config = apply_flags(base, flags);
  const auto result = run_experiment(config, load(config));
  const auto dir = output_dir(flags.out_dir);

  const auto metrics = metrics_to_json(result.fusion.metrics, config,
                                       timestamp ? std::optional(utc_timestamp()) : std::nullopt);
  write_json(dir / "metrics.json", metrics);
  write_file(dir / "roc.csv", [&](std::ostream& out) { write_roc_csv(out, result.fusion.metrics.roc); });
  write_file(dir / "fusion_trace.csv",
             [&](std::ostream& out) { write_fusion_trace_csv(out, result.fusion.traces); });
  write_file(dir / "predictions.csv",
             [&](std::ostream& out) { write_prediction_csv(out, result.first_layer.predictions); });
  std::cout << render_metrics_text(metrics);
}

void run_fuse(const std::string& artifact_path, const std::string& predictions_path, const std::string& out_dir) {
  const auto artifact = load_artifact(artifact_path);
  if (predictions_path.empty()) throw ConfigError("no prediction matrix given (use --predictions)");
  const auto preds = read_prediction_csv(predictions_path);
  preds.validate();
  const auto traces = apply_fusion_stack(artifact.stack, preds);
  const auto dir = output_dir(out_dir);
  write_file(dir / "fusion_trace.csv", [&](std::ostream& out) { write_fusion_trace_csv(out, traces); });
  std::size_t dowa = 0;
  for (const auto& t : traces) dowa += t.selected.source == FusionSource::dowa ? 1 : 0;
  std::cout << "fused " << traces.size() << " samples (DOWA " << dowa << ", IOWA " << traces.size() - dowa
            << ")\n";
}

void run_report(const std::string& metrics_path, const std::string& out_path) {
  const auto text = render_metrics_text(read_json_file(metrics_path));
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  write_file(out_path, [&](std::ostream& out) { out << text; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based OWA ensemble for binary classification"};
  app.require_subcommand(1, 1);

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-class dataset");
  synth_cmd->add_option("--out", synth_out, "Output CSV (stdout when omitted)");
  synth_cmd->add_option("--samples", synth.n_samples, "Number of rows")->capture_default_str();
  synth_cmd->add_option("--informative", synth.n_informative, "Informative features")->capture_default_str();
  synth_cmd->add_option("--noise", synth.n_noise, "Noise features")->capture_default_str();
  synth_cmd->add_option("--separation", synth.class_separation, "Class mean distance")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Seed")->capture_default_str();

  CommonFlags screen_flags, train_flags, eval_flags;
  add_common(app.add_subcommand("screen", "Rank features by forest impurity decrease"), screen_flags);
  add_common(app.add_subcommand("train", "Fit the ensemble and save the artifact"), train_flags);

  std::string eval_artifact;
  bool no_timestamp = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validated metrics for an artifact's configuration");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--artifact", eval_artifact, "ensemble.json written by train");
  eval_cmd->add_flag("--no-timestamp", no_timestamp, "Omit metadata.generated_at");

  std::string fuse_artifact, fuse_predictions, fuse_out = ".";
  auto* fuse_cmd = app.add_subcommand("fuse", "Apply a saved fusion stack to a prediction matrix");
  fuse_cmd->add_option("--artifact", fuse_artifact, "ensemble.json written by train");
  fuse_cmd->add_option("--predictions", fuse_predictions, "Prediction-matrix CSV");
  fuse_cmd->add_option("--out-dir", fuse_out, "Output directory");

  std::string report_metrics, report_out;
  auto* report_cmd = app.add_subcommand("report", "Render metrics.json as text");
  report_cmd->add_option("--metrics", report_metrics, "metrics.json")->required();
  report_cmd->add_option("--out", report_out, "Output text file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::config);
  }

  try {
    const auto* cmd = app.get_subcommands().front();
    const auto name = cmd->get_name();
    if (name == "synth") run_synth(synth, synth_out);
    else if (name == "screen") run_screen(screen_flags);
    else if (name == "train") run_train(train_flags);
    else if (name == "evaluate") run_evaluate(eval_flags, eval_artifact, !no_timestamp);
    else if (name == "fuse") run_fuse(fuse_artifact, fuse_predictions, fuse_out);
    else run_report(report_metrics, report_out);
  } catch (const Error& e) {
    std::cerr << "error";
    if (e.issue() != DataIssue::none) std::cerr << " [" << to_string(e.issue()) << "]";
    std::cerr << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
