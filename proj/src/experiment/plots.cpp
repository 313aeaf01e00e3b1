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

#include "aeda/experiment/plots.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "aeda/metrics/trend.hpp"

namespace aeda::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path, bool required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (required) throw RunDirError("missing " + path.string());
    return "";
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw RunDirError("failed to write " + path.string());
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::optional<double> opt_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  return std::nullopt;
}

}  // namespace

std::optional<double> RunData::value(std::size_t row, const std::string& column) const {
  if (row >= records.size()) return std::nullopt;
  auto it = records[row].find(column);
  if (it == records[row].end() || it->second.empty()) return std::nullopt;
  return std::stod(it->second);
}

RunData load_run(const fs::path& dir) {
  RunData run;
  run.dir = dir;
  run.name = dir.filename().string();
  if (run.name.empty()) run.name = dir.parent_path().filename().string();
  const json status = json::parse(slurp(dir / "status.json", true));
  run.method = status.value("method", "");
  run.seed = status.value("seed", std::uint64_t{0});
  run.status = status.value("status", "");
  run.config_hash = status.value("config_hash", "");
  run.dataset_hash = status.value("dataset_hash", "");
  std::istringstream records(slurp(dir / "records.csv", false));
  std::string line;
  std::vector<std::string> header;
  while (std::getline(records, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    run.records.push_back(std::move(row));
  }
  run.report_text = slurp(dir / "report.json", false);
  run.dataset_text = slurp(dir / "dataset.json", false);
  return run;
}

Comparison compare_runs(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw RunDirError("no runs to compare");
  Comparison c;
  std::vector<RunData> runs;
  for (const fs::path& dir : run_dirs) runs.push_back(load_run(dir));
  c.dataset_hash = runs.front().dataset_hash;
  for (const RunData& r : runs) {
    if (r.dataset_hash != c.dataset_hash) {
      throw RunDirError("runs use different datasets: " + runs.front().name + " (" +
                        c.dataset_hash + ") vs " + r.name + " (" + r.dataset_hash + ")");
    }
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_method;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const RunData& r : runs) {
    ComparisonRow row{r.name, r.method, r.seed, r.status, std::nullopt, std::nullopt};
    if (!r.records.empty()) {
      const std::size_t last = r.records.size() - 1;
      row.bacc = r.value(last, "bacc");
      if (auto b = r.value(last, "overall_bias")) row.bias = *b * 100.0;
    }
    if (!counts.count(r.method)) order.push_back(r.method);
    ++counts[r.method];
    if (row.bacc) per_method[r.method].first.push_back(*row.bacc);
    if (row.bias) per_method[r.method].second.push_back(*row.bias);
    c.rows.push_back(row);
  }
  std::map<std::string, MethodMean> by_name;
  for (const std::string& m : order) {
    MethodMean mm{m, counts[m], mean_of(per_method[m].first), mean_of(per_method[m].second)};
    by_name[m] = mm;
    c.means.push_back(mm);
  }
  auto bacc = [&](const char* m) -> std::optional<double> {
    return by_name.count(m) ? by_name[m].bacc : std::nullopt;
  };
  auto bias = [&](const char* m) -> std::optional<double> {
    return by_name.count(m) ? by_name[m].bias : std::nullopt;
  };
  auto flag = [&](std::string name, std::optional<double> a, std::optional<double> b,
                  double margin, bool greater) {
    OrderingFlag f{std::move(name), std::nullopt};
    if (a && b) f.holds = greater ? (*a - *b > margin) : (*a < *b);
    c.flags.push_back(f);
  };
  flag("bacc aeda_robust > aeda_online", bacc("aeda_robust"), bacc("aeda_online"), 0.0, true);
  flag("bacc aeda_online > aeda_pre", bacc("aeda_online"), bacc("aeda_pre"), 0.0, true);
  {
    OrderingFlag f{"bacc aeda_robust - original >= 15", std::nullopt};
    if (bacc("aeda_robust") && bacc("original")) {
      f.holds = *bacc("aeda_robust") - *bacc("original") >= 15.0;
    }
    c.flags.push_back(f);
  }
  flag("bias aeda_robust < aeda_online", bias("aeda_robust"), bias("aeda_online"), 0.0, false);
  flag("bias aeda_online < original", bias("aeda_online"), bias("original"), 0.0, false);
  return c;
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "run,method,seed,status,bacc,bias\n";
  for (const ComparisonRow& r : c.rows) {
    out += r.run + ',' + r.method + ',' + std::to_string(r.seed) + ',' + r.status + ',' +
           fmt(r.bacc) + ',' + fmt(r.bias) + '\n';
  }
  return out;
}

std::string comparison_text(const Comparison& c) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %5s %10s %10s\n", "method", "runs", "bACC", "bias");
  out << line;
  for (const MethodMean& m : c.means) {
    std::snprintf(line, sizeof(line), "%-16s %5zu %10s %10s\n", m.method.c_str(), m.runs,
                  m.bacc ? fmt(m.bacc).c_str() : "--", m.bias ? fmt(m.bias).c_str() : "--");
    out << line;
  }
  for (const OrderingFlag& f : c.flags) {
    out << (f.holds ? (*f.holds ? "[holds]  " : "[fails]  ") : "[n/a]    ") << f.name << '\n';
  }
  return out.str();
}

std::vector<fs::path> emit_plot_data(const std::vector<fs::path>& run_dirs,
                                     const std::string& kind, const fs::path& out_dir) {
  if (run_dirs.empty()) throw RunDirError("no runs given");
  if (kind != "bias_vs_ratio" && kind != "transferability_curves" &&
      kind != "confusion_grids" && kind != "bias_curves") {
    throw RunDirError("unknown plot kind '" + kind + "'");
  }
  std::vector<RunData> runs;
  for (const fs::path& dir : run_dirs) runs.push_back(load_run(dir));
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  if (kind == "bias_curves" || kind == "transferability_curves") {
    const bool transfer = kind == "transferability_curves";
    std::string out = transfer ? "run,method,epoch,transfer_acc\n"
                               : "run,method,epoch,bacc,overall_bias,display_bias\n";
    std::size_t rows = 0;
    for (const RunData& r : runs) {
      for (std::size_t i = 0; i < r.records.size(); ++i) {
        const std::string epoch = r.records[i].at("epoch");
        if (transfer) {
          const auto v = r.value(i, "transfer_acc");
          if (!v) continue;
          out += r.name + ',' + r.method + ',' + epoch + ',' + fmt(v) + '\n';
        } else {
          const auto b = r.value(i, "overall_bias");
          out += r.name + ',' + r.method + ',' + epoch + ',' + fmt(r.value(i, "bacc")) + ',' +
                 fmt(b) + ',' + fmt(b ? std::optional<double>(*b * 100.0) : std::nullopt) + '\n';
        }
        ++rows;
      }
    }
    const fs::path path = out_dir / (kind + ".csv");
    write_text(path, out);
    written.push_back(path);
    if (transfer && rows == 0) {
      const fs::path note = out_dir / (kind + ".note.txt");
      write_text(note, "no run carries probe records; enable probe.enabled to collect them\n");
      written.push_back(note);
    }
    return written;
  }

  if (kind == "confusion_grids") {
    for (const RunData& r : runs) {
      if (r.report_text.empty()) throw RunDirError(r.name + " has no report.json");
      const json report = json::parse(r.report_text);
      for (int b = 0; b < 2; ++b) {
        const json& m = report.at(b == 0 ? "confusion_b0" : "confusion_b1");
        std::string out = "true";
        for (std::size_t p = 0; p < m.size(); ++p) out += ",pred_" + std::to_string(p);
        out += '\n';
        for (std::size_t t = 0; t < m.size(); ++t) {
          out += std::to_string(t);
          for (const json& v : m[t]) out += ',' + std::to_string(v.get<std::size_t>());
          out += '\n';
        }
        const fs::path path = out_dir / ("confusion_" + r.name + "_b" + std::to_string(b) + ".csv");
        write_text(path, out);
        written.push_back(path);
      }
    }
    return written;
  }

  // bias_vs_ratio
  std::vector<metrics::RatioRun> ratio_runs;
  std::string out = "run,method,target,bias_ratio,bias\n";
  for (const RunData& r : runs) {
    if (r.report_text.empty() || r.dataset_text.empty()) {
      throw RunDirError(r.name + " lacks report.json or dataset.json");
    }
    const json report = json::parse(r.report_text);
    const json dataset = json::parse(r.dataset_text);
    metrics::RatioRun rr;
    rr.report.num_classes = report.at("num_classes").get<int>();
    for (const json& cls : dataset.at("train").at("classes")) {
      rr.bias_ratio.push_back(opt_number(cls.at("bias_ratio")));
    }
    for (const json& cls : report.at("per_class")) {
      rr.report.per_class_bias.push_back(opt_number(cls.at("bias")));
    }
    for (int t = 0; t < rr.report.num_classes; ++t) {
      out += r.name + ',' + r.method + ',' + std::to_string(t) + ',' + fmt(rr.bias_ratio[t]) +
             ',' + fmt(rr.report.per_class_bias[t]) + '\n';
    }
    ratio_runs.push_back(std::move(rr));
  }
  const metrics::TrendReport trend = metrics::bias_vs_ratio_report(ratio_runs);
  fs::path path = out_dir / "bias_vs_ratio.csv";
  write_text(path, out);
  written.push_back(path);
  path = out_dir / "bias_vs_ratio_trend.csv";
  write_text(path, "points,rank_correlation,sign_positive,sign_negative,sign_test_p\n" +
                       std::to_string(trend.rows.size()) + ',' + fmt(trend.rank_correlation) +
                       ',' + std::to_string(trend.sign_positive) + ',' +
                       std::to_string(trend.sign_negative) + ',' + fmt(trend.sign_test_p) + '\n');
  written.push_back(path);
  return written;
}

}  // namespace aeda::experiment
