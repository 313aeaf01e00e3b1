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

#include "aeda/experiment/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "aeda/data/manifest.hpp"
#include "aeda/experiment/plots.hpp"
#include "aeda/nn/checkpoint.hpp"
#include "aeda/util.hpp"

namespace aeda::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return std::to_string(*v);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json dataset_json(const Datasets& d, const std::string& hash) {
  auto split = [](const data::GroupedDataset& ds) {
    json classes = json::array();
    for (int t = 0; t < ds.num_classes(); ++t) {
      classes.push_back({{"target", t},
                         {"b0", ds.group_counts().count(t, 0)},
                         {"b1", ds.group_counts().count(t, 1)},
                         {"bias_ratio", optional_json(ds.bias_ratio(t))}});
    }
    json shortfalls = json::array();
    for (const data::Shortfall& s : ds.shortfalls()) {
      shortfalls.push_back({{"target", s.target},
                            {"requested", s.requested},
                            {"achieved", optional_json(s.achieved)},
                            {"dropped", s.dropped},
                            {"reason", s.reason}});
    }
    return json{{"size", ds.size()},
                {"classes", classes},
                {"notes", ds.notes()},
                {"shortfalls", shortfalls},
                {"manifest_hash", hex64(fnv1a(data::manifest_text(ds)))}};
  };
  return {{"dataset_hash", hash}, {"train", split(d.train)}, {"test", split(d.test)}};
}

std::string journal_csv(const std::vector<train::JournalEntry>& journal) {
  std::string out = "epoch,step,extractor,target_head,bias_head,probe_head\n";
  for (const train::JournalEntry& e : journal) {
    out += std::to_string(e.epoch) + ',' + e.step;
    for (std::uint64_t h : e.hashes) out += ',' + hex64(h);
    out += '\n';
  }
  return out;
}

std::string run_name(const ExperimentConfig& config, const std::string& hash) {
  if (!config.output.name.empty()) return config.output.name;
  return train::to_string(config.method.method) + "-s" + std::to_string(config.method.seed) +
         "-" + hash.substr(0, 8);
}

}  // namespace

Datasets build_datasets(const ExperimentConfig& config) {
  const data::GrayscaleCorpus corpus = data::load_corpus(config.dataset.corpus);
  const data::RatioPlan plan = resolve_ratio_plan(config.dataset.ratio_plan, corpus.num_classes);
  auto [train, test] = data::build_cmnist(corpus, config.dataset.colors, plan, config.dataset.seed);
  return {std::move(train), std::move(test)};
}

std::string report_json(const metrics::BiasReport& r, const std::string& config_hash) {
  json classes = json::array();
  for (int t = 0; t < r.num_classes; ++t) {
    classes.push_back({{"target", t},
                       {"bias", optional_json(r.per_class_bias[t])},
                       {"n_b0", r.n_per_cell[t][0]},
                       {"n_b1", r.n_per_cell[t][1]},
                       {"correct_b0", r.correct_per_cell[t][0]},
                       {"correct_b1", r.correct_per_cell[t][1]},
                       {"accuracy_b0", optional_json(r.group_accuracy[t][0])},
                       {"accuracy_b1", optional_json(r.group_accuracy[t][1])}});
  }
  json doc = {{"config_hash", config_hash},
              {"num_classes", r.num_classes},
              {"overall_bias", r.overall_bias},
              {"display_bias", r.display_bias()},
              {"bacc", optional_json(r.bacc)},
              {"per_class", classes},
              {"excluded_cells", r.excluded_cells},
              {"confusion_b0", r.group_confusion[0]},
              {"confusion_b1", r.group_confusion[1]}};
  return doc.dump(2) + "\n";
}

std::string records_csv(const std::vector<train::EpochRecord>& records) {
  std::string out =
      "epoch,target_loss,bacc,overall_bias,transfer_acc,attack_success,target_preservation,"
      "adversarial_count\n";
  for (const train::EpochRecord& r : records) {
    out += std::to_string(r.epoch) + ',' + num(r.target_loss) + ',' + opt(r.bacc) + ',' +
           opt(r.overall_bias) + ',' + opt(r.transfer_acc) + ',' + opt(r.attack_success) + ',' +
           opt(r.target_preservation) + ',' + opt(r.adversarial_count) + '\n';
  }
  return out;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return hex64(h);
}

void write_manifest(const fs::path& dir, const std::string& config_hash,
                    const std::vector<std::string>& volatile_files) {
  std::vector<std::string> names;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != "manifest.json") names.push_back(rel);
  }
  std::sort(names.begin(), names.end());
  json files = json::array();
  json vol = json::array();
  for (const std::string& name : names) {
    if (std::find(volatile_files.begin(), volatile_files.end(), name) != volatile_files.end()) {
      vol.push_back(name);
      continue;
    }
    files.push_back({{"path", name},
                     {"bytes", fs::file_size(dir / name)},
                     {"fnv1a", file_hash(dir / name)}});
  }
  json doc = {{"config_hash", config_hash}, {"files", files}, {"volatile", vol}};
  write_text(dir / "manifest.json", doc.dump(2) + "\n");
}

RunSummary run_experiment(const ExperimentConfig& config) {
  RunSummary summary;
  summary.config_hash = config_hash(config);
  validate(config);
  summary.dir = output_root(config) / run_name(config, summary.config_hash);
  fs::create_directories(summary.dir);
  const fs::path& dir = summary.dir;
  const std::string dhash = dataset_hash(config);
  write_text(dir / "config.json", to_json_text(config) + "\n");

  json status = {{"config_hash", summary.config_hash},
                 {"dataset_hash", dhash},
                 {"method", train::to_string(config.method.method)},
                 {"seed", config.method.seed}};
  std::string stage = "dataset";
  try {
    const Datasets d = build_datasets(config);
    write_text(dir / "dataset.json", dataset_json(d, dhash).dump(2) + "\n");

    stage = "train";
    nn::CompositeClassifier model(architecture_for(config, d.train.num_classes()),
                                  config.method.seed);
    const train::TrainResult result =
        train::run_method(d.train, d.test, model, config.method, config.attack);

    stage = "write";
    write_text(dir / "records.csv", records_csv(result.records));
    std::string timings = "epoch,wall_seconds\n";
    for (const train::EpochRecord& r : result.records) {
      timings += std::to_string(r.epoch) + ',' + num(r.wall_seconds) + '\n';
    }
    write_text(dir / "timings.csv", timings);
    write_text(dir / "journal.csv", journal_csv(result.journal));
    if (!result.attacks.empty()) {
      fs::create_directories(dir / "attacks");
      for (const train::AttackLog& log : result.attacks) {
        char name[32];
        std::snprintf(name, sizeof(name), "epoch_%03d.csv", log.epoch);
        attack::write_attack_log(log.result, dir / "attacks" / name);
      }
    }
    if (!result.adversarial.empty()) {
      data::GroupedDataset adv(data::Split::kTrain, d.train.image_shape(), d.train.num_classes());
      for (const data::LabeledExample& ex : result.adversarial) adv.add(ex);
      fs::create_directories(dir / "adversarial");
      data::write_dataset(adv, dir / "adversarial");
    }
    if (result.final_report) {
      write_text(dir / "report.json", report_json(*result.final_report, summary.config_hash));
    }
    nn::save_checkpoint(model, dir / "model.ckpt");
    status["checkpoint_hash"] = hex64(nn::model_hash(model));
    status["status"] = train::to_string(result.status);
    status["message"] = result.message;
    status["warnings"] = result.warnings;
    summary.status = result.status;
    summary.message = result.message;
    write_text(dir / "status.json", status.dump(2) + "\n");

    stage = "plots";
    for (const std::string& kind : config.output.plots) {
      emit_plot_data({dir}, kind, dir / "plots");
    }
  } catch (const std::exception& e) {
    summary.status.reset();
    summary.failed_stage = stage;
    summary.message = e.what();
    status["status"] = "failed";
    status["failed_stage"] = stage;
    status["message"] = e.what();
    write_text(dir / "status.json", status.dump(2) + "\n");
  }
  write_manifest(dir, summary.config_hash, {"timings.csv"});
  return summary;
}

int exit_code(const RunSummary& summary) {
  if (!summary.status) return 1;
  switch (*summary.status) {
    case train::RunStatus::kConverged:
      return 0;
    case train::RunStatus::kEpochLimit:
      return 10;
    case train::RunStatus::kAbortedDivergence:
      return 11;
    case train::RunStatus::kInapplicable:
      return 12;
  }
  return 1;
}

}  // namespace aeda::experiment
