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

// Command-line front end: build-dataset, train, evaluate, probe,
// switch-experiments, compare, emit-plots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aeda/data/manifest.hpp"
#include "aeda/experiment/config.hpp"
#include "aeda/experiment/plots.hpp"
#include "aeda/experiment/runner.hpp"
#include "aeda/metrics/bias_report.hpp"
#include "aeda/metrics/probe.hpp"
#include "aeda/nn/checkpoint.hpp"
#include "aeda/train/switch.hpp"
#include "aeda/util.hpp"

namespace fs = std::filesystem;
using namespace aeda;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", path, "JSON config file (defaults when omitted)");
    app->add_option("-s,--set", overrides, "override, e.g. method.name=aeda_robust");
  }

  experiment::ExperimentConfig load() const {
    experiment::ExperimentConfig cfg =
        path.empty() ? experiment::ExperimentConfig{} : experiment::load_config(path);
    cfg = experiment::apply_overrides(cfg, overrides);
    experiment::validate(cfg);
    return cfg;
  }
};

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("failed to write " + out);
}

experiment::ExperimentConfig run_config(const fs::path& run) {
  return experiment::load_config(run / "config.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial-example data augmentation for visual debiasing"};
  app.require_subcommand(1);

  ConfigArgs show_args;
  CLI::App* show = app.add_subcommand("show-config", "print the effective config");
  show_args.attach(show);

  ConfigArgs build_args;
  std::string build_out;
  CLI::App* build = app.add_subcommand("build-dataset", "write the coloured train/test splits");
  build_args.attach(build);
  build->add_option("-o,--out", build_out, "output directory")->required();

  ConfigArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "run one experiment");
  train_args.attach(train_cmd);

  std::string eval_run, eval_out;
  CLI::App* eval = app.add_subcommand("evaluate", "bias report of a run's checkpoint");
  eval->add_option("run", eval_run, "run directory")->required();
  eval->add_option("-o,--out", eval_out, "report file (stdout when omitted)");

  std::string probe_run;
  int probe_epochs = 0;
  std::uint64_t probe_seed = 0;
  CLI::App* probe = app.add_subcommand("probe", "transferability of a run's adversarial set");
  probe->add_option("run", probe_run, "run directory")->required();
  probe->add_option("--probe-epochs", probe_epochs, "override probe.probe_epochs");
  probe->add_option("--seed", probe_seed, "probe head seed");

  ConfigArgs switch_args;
  std::string switch_out;
  CLI::App* sw = app.add_subcommand("switch-experiments", "label-switch generalization table");
  switch_args.attach(sw);
  sw->add_option("-o,--out", switch_out, "CSV file (stdout when omitted)");

  std::vector<std::string> compare_runs;
  std::string compare_out;
  CLI::App* cmp = app.add_subcommand("compare", "method comparison over run directories");
  cmp->add_option("runs", compare_runs, "run directories")->required();
  cmp->add_option("-o,--out", compare_out, "CSV file");

  std::vector<std::string> plot_runs;
  std::string plot_kind, plot_out = "plots";
  CLI::App* plots = app.add_subcommand("emit-plots", "tabular figure data");
  plots->add_option("runs", plot_runs, "run directories")->required();
  plots->add_option("-k,--kind", plot_kind, "bias_vs_ratio | transferability_curves | "
                                            "confusion_grids | bias_curves")
      ->required();
  plots->add_option("-o,--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*show) {
      std::cout << experiment::to_json_text(show_args.load()) << '\n';
      return 0;
    }
    if (*build) {
      const experiment::ExperimentConfig cfg = build_args.load();
      const experiment::Datasets d = experiment::build_datasets(cfg);
      fs::create_directories(build_out);
      data::write_dataset(d.train, build_out);
      data::write_dataset(d.test, build_out);
      for (const data::GroupedDataset* ds : {&d.train, &d.test}) {
        std::printf("%s: %zu examples\n", data::to_string(ds->split()).c_str(), ds->size());
        for (int t = 0; t < ds->num_classes(); ++t) {
          std::printf("  t=%d b0=%zu b1=%zu\n", t, ds->group_counts().count(t, 0),
                      ds->group_counts().count(t, 1));
        }
        for (const std::string& note : ds->notes()) std::printf("  note: %s\n", note.c_str());
      }
      return 0;
    }
    if (*train_cmd) {
      const experiment::RunSummary s = experiment::run_experiment(train_args.load());
      std::printf("run: %s\n", s.dir.string().c_str());
      if (s.status) {
        std::printf("status: %s %s\n", train::to_string(*s.status).c_str(), s.message.c_str());
      } else {
        std::printf("failed in stage %s: %s\n", s.failed_stage.c_str(), s.message.c_str());
      }
      return experiment::exit_code(s);
    }
    if (*eval) {
      const experiment::ExperimentConfig cfg = run_config(eval_run);
      const experiment::Datasets d = experiment::build_datasets(cfg);
      const nn::CompositeClassifier model = nn::load_checkpoint(fs::path(eval_run) / "model.ckpt");
      const metrics::BiasReport r = metrics::evaluate(model, d.test);
      write_or_print(experiment::report_json(r, experiment::config_hash(cfg)), eval_out);
      return 0;
    }
    if (*probe) {
      const experiment::ExperimentConfig cfg = run_config(probe_run);
      const experiment::Datasets d = experiment::build_datasets(cfg);
      nn::CompositeClassifier model = nn::load_checkpoint(fs::path(probe_run) / "model.ckpt");
      const fs::path adv_dir = fs::path(probe_run) / "adversarial";
      if (!fs::exists(adv_dir)) {
        std::printf("r: absent (run has no adversarial set)\n");
        return 0;
      }
      const data::GroupedDataset adv = data::read_dataset(adv_dir, data::Split::kTrain);
      metrics::ProbeConfig pc = cfg.method.probe;
      if (probe_epochs > 0) pc.probe_epochs = probe_epochs;
      const auto r = metrics::transferability_probe(model, adv.examples(), d.test, pc, probe_seed);
      if (r) {
        std::printf("r: %.4f\n", *r);
      } else {
        std::printf("r: absent\n");
      }
      return 0;
    }
    if (*sw) {
      const experiment::ExperimentConfig cfg = switch_args.load();
      const experiment::Datasets d = experiment::build_datasets(cfg);
      const train::SwitchTable t = train::run_switch_experiments(
          d.train, d.test, experiment::switch_config_for(cfg, d.train.num_classes()), cfg.attack);
      std::string out = "setting,accuracy,attack_success,train_size\n";
      char line[160];
      std::snprintf(line, sizeof(line), "reference,%.4f,,%zu\n", t.reference_accuracy,
                    d.train.size());
      out += line;
      std::snprintf(line, sizeof(line), "robust_reference,%.4f,,%zu\n",
                    t.robust_reference_accuracy, d.train.size());
      out += line;
      for (const train::SwitchRow& r : t.rows) {
        std::snprintf(line, sizeof(line), "%s,%.4f,%s,%zu\n", r.setting.c_str(), r.accuracy,
                      r.attack_success ? std::to_string(*r.attack_success).c_str() : "",
                      r.train_size);
        out += line;
      }
      write_or_print(out, switch_out);
      return 0;
    }
    if (*cmp) {
      std::vector<fs::path> dirs(compare_runs.begin(), compare_runs.end());
      const experiment::Comparison c = experiment::compare_runs(dirs);
      std::cout << experiment::comparison_text(c);
      if (!compare_out.empty()) write_or_print(experiment::comparison_csv(c), compare_out);
      return 0;
    }
    if (*plots) {
      std::vector<fs::path> dirs(plot_runs.begin(), plot_runs.end());
      for (const fs::path& p : experiment::emit_plot_data(dirs, plot_kind, plot_out)) {
        std::printf("%s\n", p.string().c_str());
      }
      return 0;
    }
  } catch (const experiment::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const experiment::RunDirError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
