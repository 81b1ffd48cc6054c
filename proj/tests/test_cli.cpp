#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("attnfuse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(ATTNFUSE_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

const char* kQuickConfig = R"({
  "folds": 3,
  "forest": {"n_trees": 10},
  "learners": [
    {"kind": "bt", "seed": 1, "hyperparameters": {"n_trees": 10}},
    {"kind": "sgd", "seed": 2, "hyperparameters": {"epochs": 10}},
    {"kind": "et", "seed": 3, "hyperparameters": {"n_trees": 10}},
    {"kind": "ab", "seed": 4, "hyperparameters": {"n_estimators": 10}},
    {"kind": "svm", "seed": 5, "hyperparameters": {"epochs": 10}},
    {"kind": "mlp", "seed": 6, "hyperparameters": {"epochs": 10, "hidden_units": 4}}
  ]
})";

}  // namespace

TEST_F(Cli, SynthIsByteIdentical) {
  ASSERT_EQ(run("synth --samples 50 --seed 3 --out " + path("a.csv")), 0);
  ASSERT_EQ(run("synth --samples 50 --seed 3 --out " + path("b.csv")), 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(run("synth --samples 5 --out " + path("c.csv")), 2);
}

TEST_F(Cli, ScreenWritesReportsAndLeavesInputAlone) {
  ASSERT_EQ(run("synth --samples 200 --seed 1 --out " + path("d.csv")), 0);
  const auto before = slurp(path("d.csv"));
  ASSERT_EQ(run("screen --data " + path("d.csv") + " --out-dir " + path("s")), 0);
  EXPECT_EQ(slurp(path("d.csv")), before);
  const auto report = nlohmann::json::parse(slurp(path("s/screening.json")));
  EXPECT_EQ(report["features"].size(), 20u);
  EXPECT_TRUE(fs::exists(path("s/contributions.csv")));
  const auto corr = slurp(path("s/feature_correlation.csv"));
  EXPECT_EQ(corr.substr(0, 11), "feature,V1,");
  const auto first = slurp(path("s/screening.json"));
  ASSERT_EQ(run("screen --data " + path("d.csv") + " --out-dir " + path("s")), 0);
  EXPECT_EQ(slurp(path("s/screening.json")), first);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("evaluate --artifact " + path("missing.json") + " --data x.csv"), 2);
  EXPECT_EQ(run("train --unknown-flag"), 2);
  EXPECT_EQ(run(""), 2);
  write("nolabel.csv", "id,V1,Label\n0,1.0,0\n");
  EXPECT_EQ(run("screen --data " + path("nolabel.csv")), 3);
  write("text.csv", "id,V1,Class\n0,abc,0\n");
  EXPECT_EQ(run("screen --data " + path("text.csv")), 3);
  EXPECT_NE(slurp(path("stderr.txt")).find("V1"), std::string::npos);
  write("empty.csv", "");
  EXPECT_EQ(run("screen --data " + path("empty.csv")), 3);
  write("bad.json", "{ not json");
  EXPECT_EQ(run("screen --data x.csv --config " + path("bad.json")), 2);
  EXPECT_EQ(run("screen --data x.csv --threshold 200"), 2);
}

TEST_F(Cli, LabelFlag) {
  write("l.csv", "x,y,target\n1,2,0\n2,1,1\n1.5,2.5,0\n2.5,1.5,1\n1,3,0\n3,1,1\n");
  EXPECT_EQ(run("screen --data " + path("l.csv") + " --out-dir " + path("o")), 3);
  EXPECT_EQ(run("screen --data " + path("l.csv") + " --label target --out-dir " + path("o")), 0);
}

TEST_F(Cli, FuseFollowsSelectionRuleByHand) {
  // DOWA group bt, et, ab; IOWA group sgd, svm, mlp with uniform weights.
  write("artifact.json", R"({
    "format": "attnfuse-ensemble", "version": 1,
    "grouping": {"dowa": ["bt", "et", "ab"], "iowa": ["sgd", "svm", "mlp"]},
    "iowa": {"class0": {"betas": [0, 0, 0]}, "class1": {"betas": [0, 0, 0]}},
    "ridge": {"coefficients": [-1, 1], "bias": 0}
  })");
  // Row 0: DOWA class-1 args (0.9, 0.8, 0.1) give (0.34, 0.66), margin 0.32; IOWA all 0.5, margin 0 -> DOWA.
  // Row 1: DOWA all 0.5, margin 0; IOWA class-1 (0.1, 0.2, 0.0) give (0.9, 0.1), margin 0.8 -> IOWA.
  // Row 2: both groups all 0.7, equal margins 0.4 -> DOWA.
  write("preds.csv",
        "sample_id,fold,true_class,bt_p0,bt_p1,sgd_p0,sgd_p1,et_p0,et_p1,ab_p0,ab_p1,svm_p0,svm_p1,mlp_p0,mlp_p1\n"
        "10,0,1,0.1,0.9,0.5,0.5,0.2,0.8,0.9,0.1,0.5,0.5,0.5,0.5\n"
        "11,0,0,0.5,0.5,0.9,0.1,0.5,0.5,0.5,0.5,0.8,0.2,1,0\n"
        "12,0,1,0.3,0.7,0.3,0.7,0.3,0.7,0.3,0.7,0.3,0.7,0.3,0.7\n");
  ASSERT_EQ(run("fuse --artifact " + path("artifact.json") + " --predictions " + path("preds.csv") +
                " --out-dir " + path("f")),
            0)
      << slurp(path("stderr.txt"));
  std::istringstream trace(slurp(path("f/fusion_trace.csv")));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "sample_id,f_dowa_0,f_dowa_1,f_iowa_0,f_iowa_1,source,meta_score,predicted,true");
  const char* expected_source[] = {"DOWA", "IOWA", "DOWA"};
  const char* expected_id[] = {"10", "11", "12"};
  for (int i = 0; i < 3; ++i) {
    ASSERT_TRUE(std::getline(trace, line));
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 9u);
    EXPECT_EQ(cells[0], expected_id[i]);
    EXPECT_EQ(cells[5], expected_source[i]) << "row " << i;
    if (i == 0) EXPECT_NEAR(std::stod(cells[2]), 0.66, 1e-12);
  }
}

TEST_F(Cli, FuseRejectsMissingLearner) {
  write("artifact.json", R"({
    "format": "attnfuse-ensemble", "version": 1,
    "grouping": {"dowa": ["bt", "et", "ab"], "iowa": ["sgd", "svm", "mlp"]},
    "iowa": {"class0": {"betas": [0, 0, 0]}, "class1": {"betas": [0, 0, 0]}},
    "ridge": {"coefficients": [-1, 1], "bias": 0}
  })");
  write("preds.csv", "sample_id,fold,true_class,bt_p0,bt_p1\n0,0,1,0.2,0.8\n");
  EXPECT_EQ(run("fuse --artifact " + path("artifact.json") + " --predictions " + path("preds.csv") +
                " --out-dir " + path("f")),
            3);
}

TEST_F(Cli, TrainEvaluateReport) {
  ASSERT_EQ(run("synth --samples 150 --informative 3 --noise 2 --seed 2 --out " + path("d.csv")), 0);
  write("cfg.json", kQuickConfig);
  ASSERT_EQ(run("train --data " + path("d.csv") + " --config " + path("cfg.json") + " --out-dir " + path("t")), 0)
      << slurp(path("stderr.txt"));
  for (const char* f : {"ensemble.json", "predictions.csv", "screening.json", "contributions.csv"}) {
    EXPECT_TRUE(fs::exists(path(std::string("t/") + f))) << f;
  }
  ASSERT_EQ(run("evaluate --artifact " + path("t/ensemble.json") + " --data " + path("d.csv") + " --out-dir " +
                path("e1")),
            0)
      << slurp(path("stderr.txt"));
  ASSERT_EQ(run("evaluate --artifact " + path("t/ensemble.json") + " --data " + path("d.csv") + " --out-dir " +
                path("e2")),
            0);
  auto m1 = nlohmann::ordered_json::parse(slurp(path("e1/metrics.json")));
  auto m2 = nlohmann::ordered_json::parse(slurp(path("e2/metrics.json")));
  EXPECT_TRUE(m1["metadata"].contains("generated_at"));
  m1.erase("metadata");
  m2.erase("metadata");
  EXPECT_EQ(m1.dump(), m2.dump());
  EXPECT_EQ(slurp(path("e1/roc.csv")), slurp(path("e2/roc.csv")));
  EXPECT_EQ(slurp(path("e1/fusion_trace.csv")), slurp(path("e2/fusion_trace.csv")));
  EXPECT_EQ(m1["per_fold"].size(), 3u);

  ASSERT_EQ(run("report --metrics " + path("e1/metrics.json") + " --out " + path("report.txt")), 0);
  EXPECT_NE(slurp(path("report.txt")).find("Pooled held-out metrics"), std::string::npos);
  EXPECT_EQ(run("report --metrics " + path("nothing.json")), 2);

  ASSERT_EQ(run("fuse --artifact " + path("t/ensemble.json") + " --predictions " + path("t/predictions.csv") +
                " --out-dir " + path("f")),
            0);
}
