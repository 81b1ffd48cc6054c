// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "attnfuse/data_io.hpp"
#include "attnfuse/ensemble.hpp"
#include "attnfuse/metrics.hpp"
#include "attnfuse/owa.hpp"
#include "attnfuse/screening.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace attnfuse;

namespace {

// Pinned tolerances and budgets.
constexpr double kDowaIdentityTol = 1e-9;
constexpr double kPermutationTol = 1e-12;
constexpr double kWorkedExampleTol = 1e-12;
constexpr double kGradientRelTol = 1e-4;
constexpr double kRecoveryTol = 0.02;
constexpr double kMetricsTol = 1e-12;
constexpr double kHandCaseTol = 5e-5;  // 4 decimals
constexpr double kAucTol = 1e-9;
constexpr double kAccuracyMarginPp = 0.5;
constexpr double kMinSourceShare = 0.01;
constexpr double kDowaBudgetS = 1.0;
constexpr double kIowaBudgetS = 5.0;
constexpr double kScreeningBudgetS = 30.0;
constexpr double kEndToEndBudgetS = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void dowa_identities() {
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(2, 8);
  double worst_sum = 0.0, worst_simplex = 0.0, worst_perm = 0.0;
  bool bounded = true;
  const auto start = Clock::now();
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(static_cast<std::size_t>(len(gen)));
    for (auto& x : a) x = u(gen);
    const auto c = owa::dowa_similarities(a);
    worst_sum = std::max(worst_sum, std::fabs(std::accumulate(c.begin(), c.end(), 0.0) - (a.size() - 1.0)));
    const auto w = owa::dowa_weights(a);
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      worst_simplex = std::max(worst_simplex, std::max(0.0, -w[i]));
      total += w[i];
    }
    worst_simplex = std::max(worst_simplex, std::fabs(total - 1.0));
    const double agg = owa::dowa_aggregate(a);
    bounded = bounded && agg >= *std::min_element(a.begin(), a.end()) && agg <= *std::max_element(a.begin(), a.end());
    auto p = a;
    std::shuffle(p.begin(), p.end(), gen);
    worst_perm = std::max(worst_perm, std::fabs(owa::dowa_aggregate(p) - agg));
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst_sum <= kDowaIdentityTol && worst_simplex <= kDowaIdentityTol && bounded &&
                  worst_perm <= kPermutationTol && elapsed < kDowaBudgetS;
  report("dowa_identity_suite", ok,
         fmt("sum err %.1e, simplex err %.1e, bounded %s, perm err %.1e, %.3f s", worst_sum, worst_simplex,
             bounded ? "yes" : "no", worst_perm, elapsed));
}

void dowa_worked_example() {
  const std::vector<double> a{0.9, 0.8, 0.1};
  const auto w = owa::dowa_weights(a);
  const double agg = owa::dowa_aggregate(a);
  const auto ref = oracle::dowa(a);
  const double expected[3] = {0.35, 0.40, 0.25};
  double err = std::fabs(agg - 0.66);
  for (std::size_t i = 0; i < 3; ++i) {
    err = std::max(err, std::fabs(w[i] - expected[i]));
    err = std::max(err, std::fabs(w[i] - ref.weights_by_rank[i]));
  }
  err = std::max(err, std::fabs(agg - ref.aggregate));
  report("dowa_worked_example", err <= kWorkedExampleTol,
         fmt("weights (%.4f, %.4f, %.4f), aggregate %.15f, max err %.1e", w[0], w[1], w[2], agg, err));
}

void iowa_gradient_check() {
  std::mt19937_64 gen(1002);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> beta{nd(gen), nd(gen), nd(gen)};
    const std::vector<double> b{u(gen), u(gen), u(gen)};
    const double d = u(gen);
    const auto g = owa::iowa_error_gradient(beta, b, d);
    for (std::size_t i = 0; i < 3; ++i) {
      const double h = 1e-5;
      auto plus = beta, minus = beta;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (oracle::iowa_error(plus, b, d) - oracle::iowa_error(minus, b, d)) / (2.0 * h);
      worst = std::max(worst, std::fabs(g[i] - fd) / std::max(std::fabs(fd), 1e-8));
    }
  }
  report("iowa_gradient_check", worst <= kGradientRelTol, fmt("max relative error %.2e at 100 points", worst));
}

void iowa_recovery() {
  const std::vector<double> target{0.6, 0.3, 0.1};
  std::mt19937_64 gen(1003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<owa::IowaTrainingSample> samples;
  for (int k = 0; k < 500; ++k) {
    std::vector<double> b{u(gen), u(gen), u(gen)};
    std::sort(b.begin(), b.end(), std::greater<>());
    samples.push_back({b, target[0] * b[0] + target[1] * b[1] + target[2] * b[2]});
  }
  const auto start = Clock::now();
  owa::IowaTrainOptions opts;
  opts.learning_rate = 0.1;
  opts.max_epochs = 200;
  const auto model = owa::iowa_train(samples, opts);
  const double elapsed = seconds_since(start);
  const auto w = owa::iowa_weights(model);
  double linf = 0.0;
  for (std::size_t i = 0; i < 3; ++i) linf = std::max(linf, std::fabs(w[i] - target[i]));
  bool monotone = true;
  for (std::size_t e = 2; e < model.epoch_errors.size(); ++e) {
    monotone = monotone && model.epoch_errors[e] <= model.epoch_errors[e - 1];
  }
  report("iowa_weight_recovery", linf <= kRecoveryTol && monotone && model.epochs_run <= 200 && elapsed < kIowaBudgetS,
         fmt("w (%.4f, %.4f, %.4f), Linf %.4f, %d epochs, non-increasing %s, %.3f s", w[0], w[1], w[2], linf,
             model.epochs_run, monotone ? "yes" : "no", elapsed));
}

void metrics_oracle() {
  std::mt19937_64 gen(1004);
  std::uniform_int_distribution<int> d(0, 1000);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    ConfusionCounts c{static_cast<std::uint64_t>(d(gen)), static_cast<std::uint64_t>(d(gen)),
                      static_cast<std::uint64_t>(d(gen)), static_cast<std::uint64_t>(d(gen))};
    if (c.total() == 0) c.tp = 1;
    const auto m = compute_metrics(c);
    const auto r = oracle::metrics(c.tp, c.fp, c.tn, c.fn);
    for (auto [x, y] : {std::pair{m.precision, r.precision}, {m.specificity, r.specificity}, {m.accuracy, r.accuracy},
                        {m.sensitivity, r.sensitivity}, {m.mcc, r.mcc}, {m.f1, r.f1}}) {
      worst = std::max(worst, std::fabs(x - y));
    }
  }
  const auto h = compute_metrics({3, 1, 4, 2});
  const double hand[6] = {0.75, 0.6, 0.8, 0.7, 0.6667, 0.4082};
  const double got[6] = {h.precision, h.sensitivity, h.specificity, h.accuracy, h.f1, h.mcc};
  double hand_err = 0.0;
  for (int i = 0; i < 6; ++i) hand_err = std::max(hand_err, std::fabs(hand[i] - got[i]));
  // Exact class balance: 10000 positives, 10000 negatives.
  const auto bal = compute_metrics({9990, 0, 10000, 10});
  const double identity = std::fabs(bal.accuracy - (bal.sensitivity + bal.specificity) / 2.0);
  report("metrics_oracle", worst <= kMetricsTol && hand_err <= kHandCaseTol && identity <= kMetricsTol &&
                               std::fabs(bal.accuracy - 0.9995) <= kMetricsTol,
         fmt("random max err %.1e, hand case err %.1e, balance identity err %.1e", worst, hand_err, identity));
}

void auc_oracle() {
  std::mt19937_64 gen(1005);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_int_distribution<int> level(0, 20);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(size(gen));
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      s[i] = level(gen) / 20.0;
    }
    std::shuffle(y.begin(), y.end(), gen);
    worst = std::max(worst, std::fabs(roc_curve(s, y).auc - oracle::pairwise_auc(s, y)));
  }
  const double four = roc_curve(std::vector{0.9, 0.8, 0.3, 0.1}, std::vector{1, 0, 1, 0}).auc;
  report("auc_oracle", worst <= kAucTol && four == 0.75,
         fmt("max |trapezoid - pairwise| %.1e over 200 instances, 4-sample AUC %.17g", worst, four));
}

void screening_recovery() {
  SynthConfig sc;
  sc.n_samples = 2000;
  sc.n_informative = 5;
  sc.n_noise = 15;
  sc.class_separation = 3.0;
  sc.seed = 1006;
  const auto data = make_synthetic(sc);
  ForestConfig fc;
  fc.seed = 1006;
  const auto start = Clock::now();
  const auto r = screen(data, fc, 0.5);
  const double elapsed = seconds_since(start);
  int informative = 0, noise_dropped = 0;
  for (std::size_t f = 0; f < r.contributions.size(); ++f) {
    const bool kept = std::find(r.retained.begin(), r.retained.end(), r.contributions[f].name) != r.retained.end();
    if (f < 5) informative += kept ? 1 : 0;
    else noise_dropped += kept ? 0 : 1;
  }
  report("screening_recovery", informative == 5 && noise_dropped >= 12 && elapsed < kScreeningBudgetS,
         fmt("informative retained %d/5, noise dropped %d/15, %.2f s", informative, noise_dropped, elapsed));
}

void selection_layer() {
  struct Row {
    FusionVector d, i;
  };
  const std::vector<Row> table{
      {{0.9, 0.1, FusionSource::dowa}, {0.6, 0.4, FusionSource::iowa}},
      {{0.5, 0.5, FusionSource::dowa}, {0.0, 1.0, FusionSource::iowa}},
      {{0.3, 0.7, FusionSource::dowa}, {0.7, 0.3, FusionSource::iowa}},  // equal margins
      {{0.2, 0.2, FusionSource::dowa}, {0.2, 0.2, FusionSource::iowa}},  // identical
      {{0.45, 0.55, FusionSource::dowa}, {0.8, 0.1, FusionSource::iowa}},
      {{1.0, 0.0, FusionSource::dowa}, {0.0, 1.0, FusionSource::iowa}},  // equal margins
      {{0.52, 0.48, FusionSource::dowa}, {0.47, 0.53, FusionSource::iowa}},  // margins 0.04 vs 0.06
  };
  int mismatches = 0;
  for (const auto& row : table) {
    // Algorithm by hand: keep F_DOWA when its margin is at least F_IOWA's.
    const double md = std::fabs(row.d.class0 - row.d.class1);
    const double mi = std::fabs(row.i.class0 - row.i.class1);
    const auto& expected = md >= mi ? row.d : row.i;
    if (!(select(row.d, row.i) == expected)) ++mismatches;
  }
  const bool tie_ok = select(table[2].d, table[2].i).source == FusionSource::dowa &&
                      select(table[5].d, table[5].i).source == FusionSource::dowa;
  report("selection_layer", mismatches == 0 && tie_ok,
         fmt("%zu rows, %d mismatches, tie -> DOWA %s", table.size(), mismatches, tie_ok ? "yes" : "no"));
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ATTNFUSE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string without_metadata(const fs::path& p) {
  auto doc = nlohmann::ordered_json::parse(slurp(p));
  doc.erase("metadata");
  return doc.dump(2);
}

void end_to_end_and_determinism() {
  const fs::path dir = fs::temp_directory_path() / "attnfuse_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto data = (dir / "data.csv").string();
  const auto log = dir / "log.txt";

  const auto start = Clock::now();
  std::vector<std::pair<std::string, int>> steps;
  steps.emplace_back("synth", run_cli("synth --samples 5000 --separation 2 --seed 2026 --out " + data, log));
  steps.emplace_back("screen", run_cli("screen --data " + data + " --out-dir " + (dir / "screen").string(), log));
  steps.emplace_back("train", run_cli("train --data " + data + " --out-dir " + (dir / "train").string(), log));
  steps.emplace_back("evaluate", run_cli("evaluate --artifact " + (dir / "train/ensemble.json").string() +
                                             " --data " + data + " --out-dir " + (dir / "eval1").string(),
                                         log));
  const double elapsed = seconds_since(start);

  std::string failed_step;
  for (const auto& [name, code] : steps) {
    if (code != 0 && failed_step.empty()) failed_step = name + " exited " + std::to_string(code);
  }
  if (!failed_step.empty()) {
    report("end_to_end_desk_run", false, failed_step + ": " + slurp(log));
    report("determinism", false, "end-to-end run did not complete");
    return;
  }

  const auto metrics = nlohmann::json::parse(slurp(dir / "eval1/metrics.json"));
  const double ensemble = metrics["pooled"]["accuracy"].get<double>();
  double best = 0.0;
  std::string best_name;
  for (const auto& [name, acc] : metrics["first_layer_accuracy"].items()) {
    if (acc.get<double>() > best) {
      best = acc.get<double>();
      best_name = name;
    }
  }
  const double dowa = metrics["selection"]["dowa_fraction"].get<double>();
  const double iowa = metrics["selection"]["iowa_fraction"].get<double>();
  const bool ok = elapsed < kEndToEndBudgetS && 100.0 * ensemble >= 100.0 * best - kAccuracyMarginPp &&
                  dowa >= kMinSourceShare && iowa >= kMinSourceShare;
  report("end_to_end_desk_run", ok,
         fmt("ensemble acc %.2f%% vs best first-layer %.2f%% (%s), DOWA %.1f%%, IOWA %.1f%%, no leakage, %.1f s",
             100.0 * ensemble, 100.0 * best, best_name.c_str(), 100.0 * dowa, 100.0 * iowa, elapsed));

  // Second full run from the same config and seed.
  const int retrain = run_cli("train --data " + data + " --out-dir " + (dir / "train2").string(), log);
  const int reeval = run_cli("evaluate --artifact " + (dir / "train2/ensemble.json").string() + " --data " + data +
                                 " --out-dir " + (dir / "eval2").string(),
                             log);
  bool same = retrain == 0 && reeval == 0;
  same = same && without_metadata(dir / "eval1/metrics.json") == without_metadata(dir / "eval2/metrics.json");
  same = same && slurp(dir / "train/ensemble.json") == slurp(dir / "train2/ensemble.json");
  for (const char* f : {"roc.csv", "fusion_trace.csv", "predictions.csv"}) {
    same = same && slurp(dir / "eval1" / f) == slurp(dir / "eval2" / f);
  }
  report("determinism", same,
         same ? "metrics JSON (metadata excluded), artifact, ROC, traces and predictions byte-identical"
              : "outputs differ between runs");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  dowa_identities();
  dowa_worked_example();
  iowa_gradient_check();
  iowa_recovery();
  metrics_oracle();
  auc_oracle();
  screening_recovery();
  selection_layer();
  end_to_end_and_determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
