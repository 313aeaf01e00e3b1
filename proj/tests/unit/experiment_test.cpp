/*
 * Copyright 2026 The AEDA Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "aeda/experiment/config.hpp"
#include "aeda/experiment/plots.hpp"
#include "aeda/experiment/runner.hpp"
#include "fixtures.hpp"

namespace aeda::experiment {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aeda_exp_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tiny_config(const fs::path& root) {
  ExperimentConfig c;
  c.dataset.corpus.path = testing::corpus_path();
  c.dataset.corpus.downsample = 4;
  c.dataset.corpus.max_train_per_class = 12;
  c.dataset.corpus.max_test_per_class = 6;
  c.model.preset = "tiny";
  c.model.feature_dim = 8;
  c.method.epochs = 2;
  c.method.batch_size = 32;
  c.method.convergence.enabled = false;
  c.attack.epsilon = 0.3;
  c.attack.alpha = 0.1;
  c.attack.steps = 2;
  c.output.root = root.string();
  return c;
}

struct EnvGuard {
  explicit EnvGuard(const std::string& value) { setenv(kOutputRootEnv, value.c_str(), 1); }
  ~EnvGuard() { unsetenv(kOutputRootEnv); }
};

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = tiny_config("/tmp/x");
  c.method.method = train::Method::kAedaRobust;
  c.method.adv_interval = 3;
  c.method.online_cutoff_epoch = 4;
  c.method.robust_labels = train::AdvLabelMode::kAttacked;
  c.method.probe.enabled = true;
  c.dataset.ratio_plan = "split:0.1:0.9";
  c.output.plots = {"bias_curves"};
  const std::string text = to_json_text(c);
  const ExperimentConfig back = from_json_text(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_json_text(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(from_json_text("{}"), ExperimentConfig{});
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(from_json_text(R"({"method": {"lr": 0.1}})"), ConfigError);
  EXPECT_THROW(from_json_text(R"({"solver": {}})"), ConfigError);
  EXPECT_THROW(from_json_text("not json"), ConfigError);
  EXPECT_THROW(from_json_text(R"({"method": {"name": "magic"}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, Overrides) {
  const ExperimentConfig base;
  const ExperimentConfig c = apply_overrides(
      base, {"method.name=aeda_online", "method.epochs=7", "attack.epsilon=0.25",
             "probe.enabled=true", "dataset.ratio_plan=uniform:0.9", "output.name=run-a"});
  EXPECT_EQ(c.method.method, train::Method::kAedaOnline);
  EXPECT_EQ(c.method.epochs, 7);
  EXPECT_DOUBLE_EQ(c.attack.epsilon, 0.25);
  EXPECT_TRUE(c.method.probe.enabled);
  EXPECT_EQ(c.dataset.ratio_plan, "uniform:0.9");
  EXPECT_EQ(c.output.name, "run-a");
  EXPECT_THROW(apply_overrides(base, {"epochs=3"}), ConfigError);
  EXPECT_THROW(apply_overrides(base, {"method.nope=3"}), ConfigError);
  EXPECT_NE(config_hash(c), config_hash(base));
}

TEST(Config, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  c.method.epochs = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.method.adv_interval = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.attack.alpha = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.output.plots = {"scatter"};
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, RatioPlans) {
  EXPECT_EQ(resolve_ratio_plan("extreme", 4), data::split_plan(4, 0.0, 1.0));
  EXPECT_EQ(resolve_ratio_plan("balanced", 4), data::uniform_plan(4, 0.5));
  EXPECT_EQ(resolve_ratio_plan("uniform:0.9", 3), data::uniform_plan(3, 0.9));
  EXPECT_EQ(resolve_ratio_plan("split:0.2:0.7", 4), data::split_plan(4, 0.2, 0.7));
  EXPECT_EQ(resolve_ratio_plan(R"({"0": 0.1, "1": 0.6})", 2),
            (data::RatioPlan{{0, 0.1}, {1, 0.6}}));
  EXPECT_THROW(resolve_ratio_plan("tilted", 4), ConfigError);
  EXPECT_THROW(resolve_ratio_plan("uniform:1.5", 4), ConfigError);
  EXPECT_THROW(resolve_ratio_plan(R"({"0": 0.1})", 2), ConfigError);
}

TEST(Config, EnvironmentOverridesOutputRoot) {
  ExperimentConfig c;
  c.output.root = "runs";
  unsetenv(kOutputRootEnv);
  EXPECT_EQ(output_root(c), fs::path("runs"));
  EnvGuard env("/tmp/elsewhere");
  EXPECT_EQ(output_root(c), fs::path("/tmp/elsewhere"));
}

TEST(Config, DatasetHashIgnoresMethod) {
  ExperimentConfig a, b;
  b.method.method = train::Method::kAedaPre;
  EXPECT_EQ(dataset_hash(a), dataset_hash(b));
  b.dataset.seed = 9;
  EXPECT_NE(dataset_hash(a), dataset_hash(b));
}

TEST(Runner, RecordsCsvLeavesAbsentFieldsEmpty) {
  train::EpochRecord r;
  r.epoch = 3;
  r.target_loss = 0.5;
  r.bacc = 50.0;
  const std::string csv = records_csv({r});
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.substr(0, 18), "epoch,target_loss,");
  EXPECT_EQ(row.substr(0, 11), "3,0.5,50,,,");
}

TEST(Runner, WritesRunDirectoryAndIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig c = tiny_config("unused");
  c.method.method = train::Method::kAedaOnline;
  c.method.probe.enabled = true;
  c.method.probe.probe_epochs = 1;
  c.output.name = "same";
  c.output.plots = {"bias_curves"};
  RunSummary ra, rb;
  {
    EnvGuard env(a.string());
    ra = run_experiment(c);
  }
  {
    EnvGuard env(b.string());
    rb = run_experiment(c);
  }
  ASSERT_TRUE(ra.status.has_value()) << ra.failed_stage << ": " << ra.message;
  EXPECT_EQ(*ra.status, train::RunStatus::kEpochLimit);
  EXPECT_EQ(exit_code(ra), 10);
  for (const char* f : {"config.json", "dataset.json", "records.csv", "timings.csv",
                        "journal.csv", "report.json", "model.ckpt", "status.json",
                        "manifest.json", "attacks/epoch_000.csv", "plots/bias_curves.csv"}) {
    EXPECT_TRUE(fs::exists(ra.dir / f)) << f;
  }
  EXPECT_EQ(slurp(ra.dir / "manifest.json"), slurp(rb.dir / "manifest.json"));
  EXPECT_EQ(slurp(ra.dir / "records.csv"), slurp(rb.dir / "records.csv"));
  EXPECT_NE(slurp(ra.dir / "manifest.json").find("timings.csv"), std::string::npos);

  const RunData run = load_run(ra.dir);
  EXPECT_EQ(run.method, "aeda_online");
  EXPECT_EQ(run.records.size(), 2u);
  EXPECT_TRUE(run.value(1, "bacc").has_value());
  EXPECT_TRUE(run.value(1, "transfer_acc").has_value());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Runner, InapplicableBaselineExitCode) {
  const fs::path root = scratch("inapp");
  ExperimentConfig c = tiny_config(root);
  c.method.method = train::Method::kReweighting;
  const RunSummary s = run_experiment(c);
  ASSERT_TRUE(s.status.has_value());
  EXPECT_EQ(*s.status, train::RunStatus::kInapplicable);
  EXPECT_EQ(exit_code(s), 12);
  EXPECT_NE(slurp(s.dir / "status.json").find("inapplicable"), std::string::npos);
  fs::remove_all(root);
}

TEST(Runner, MissingCorpusIsAFailedStage) {
  const fs::path root = scratch("nocorpus");
  ExperimentConfig c = tiny_config(root);
  c.dataset.corpus.path = "/nonexistent/digits.csv";
  const RunSummary s = run_experiment(c);
  EXPECT_FALSE(s.status.has_value());
  EXPECT_EQ(s.failed_stage, "dataset");
  EXPECT_EQ(exit_code(s), 1);
  EXPECT_TRUE(fs::exists(s.dir / "status.json"));
  fs::remove_all(root);
}

TEST(Compare, MeansFlagsAndMissingMetrics) {
  const fs::path root = scratch("compare");
  ExperimentConfig c = tiny_config(root);
  c.method.epochs = 1;
  std::vector<fs::path> dirs;
  for (auto m : {train::Method::kOriginal, train::Method::kReweighting}) {
    c.method.method = m;
    dirs.push_back(run_experiment(c).dir);
  }
  const Comparison cmp = compare_runs(dirs);
  ASSERT_EQ(cmp.rows.size(), 2u);
  EXPECT_TRUE(cmp.rows[0].bacc.has_value());
  EXPECT_FALSE(cmp.rows[1].bacc.has_value());  // inapplicable run has no records
  for (const OrderingFlag& f : cmp.flags) EXPECT_FALSE(f.holds.has_value()) << f.name;
  const std::string csv = comparison_csv(cmp);
  EXPECT_NE(csv.find("reweighting"), std::string::npos);
  EXPECT_FALSE(comparison_text(cmp).empty());

  // A run on different data is refused.
  c.method.method = train::Method::kOriginal;
  c.dataset.seed = 77;
  dirs.push_back(run_experiment(c).dir);
  EXPECT_THROW(compare_runs(dirs), RunDirError);
  EXPECT_THROW(compare_runs({}), RunDirError);
  EXPECT_THROW(compare_runs({root / "missing"}), RunDirError);
  fs::remove_all(root);
}

TEST(Plots, KindsAndErrors) {
  const fs::path root = scratch("plots");
  ExperimentConfig c = tiny_config(root);
  c.method.epochs = 1;
  const fs::path run = run_experiment(c).dir;
  const fs::path out = root / "out";
  EXPECT_THROW(emit_plot_data({}, "bias_curves", out), RunDirError);
  EXPECT_THROW(emit_plot_data({run}, "pie", out), RunDirError);
  const auto curves = emit_plot_data({run}, "bias_curves", out);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_NE(slurp(curves[0]).find("original"), std::string::npos);
  const auto grids = emit_plot_data({run}, "confusion_grids", out);
  EXPECT_EQ(grids.size(), 2u);
  const auto transfer = emit_plot_data({run}, "transferability_curves", out);
  EXPECT_FALSE(transfer.empty());
  const auto ratio = emit_plot_data({run}, "bias_vs_ratio", out);
  EXPECT_FALSE(ratio.empty());
  fs::remove_all(root);
}

}  // namespace
}  // namespace aeda::experiment
