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

#include "aeda/data/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace aeda::data {

namespace {

namespace fs = std::filesystem;

std::vector<std::size_t> manifest_order(const GroupedDataset& ds) {
  std::vector<std::size_t> order = all_indices(ds);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = std::make_pair(ds[a].source_id, static_cast<int>(ds[a].provenance));
    const auto kb = std::make_pair(ds[b].source_id, static_cast<int>(ds[b].provenance));
    return ka < kb;
  });
  return order;
}

std::string pixels_name(Split s) { return to_string(s) + "_pixels.bin"; }

}  // namespace

std::string manifest_text(const GroupedDataset& ds) {
  std::ostringstream os;
  os << "source_id,split,target,bias,provenance,tensor_ref\n";
  const std::vector<std::size_t> order = manifest_order(ds);
  for (std::size_t row = 0; row < order.size(); ++row) {
    const LabeledExample& ex = ds[order[row]];
    os << ex.source_id << ',' << to_string(ds.split()) << ',' << ex.target << ',' << ex.bias
       << ',' << to_string(ex.provenance) << ',' << pixels_name(ds.split()) << '#' << row
       << '\n';
  }
  return os.str();
}

std::vector<fs::path> write_dataset(const GroupedDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string split = to_string(ds.split());
  const fs::path manifest = dir / (split + "_manifest.csv");
  const fs::path pixels = dir / pixels_name(ds.split());
  const fs::path meta = dir / (split + "_meta.json");

  std::ofstream(manifest, std::ios::binary) << manifest_text(ds);

  std::ofstream px(pixels, std::ios::binary);
  for (std::size_t i : manifest_order(ds)) {
    const auto& v = ds[i].pixels;
    px.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!px) throw DatasetError("failed to write " + pixels.string());

  nlohmann::ordered_json j;
  j["split"] = split;
  j["image_shape"] = {ds.image_shape().height, ds.image_shape().width, ds.image_shape().channels};
  j["num_classes"] = ds.num_classes();
  j["num_examples"] = ds.size();
  j["notes"] = ds.notes();
  j["shortfalls"] = nlohmann::ordered_json::array();
  for (const Shortfall& s : ds.shortfalls()) {
    nlohmann::ordered_json e;
    e["target"] = s.target;
    e["requested"] = s.requested;
    e["achieved"] = s.achieved ? nlohmann::ordered_json(*s.achieved) : nlohmann::ordered_json();
    e["dropped"] = s.dropped;
    e["reason"] = s.reason;
    j["shortfalls"].push_back(e);
  }
  std::ofstream(meta, std::ios::binary) << j.dump(2) << '\n';
  return {manifest, pixels, meta};
}

GroupedDataset read_dataset(const fs::path& dir, Split split) {
  const std::string name = to_string(split);
  std::ifstream meta_in(dir / (name + "_meta.json"));
  if (!meta_in) throw DatasetError("missing " + (dir / (name + "_meta.json")).string());
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  const nn::Shape shape{meta["image_shape"][0], meta["image_shape"][1], meta["image_shape"][2]};
  GroupedDataset ds(split, shape, meta["num_classes"].get<int>());
  ds.notes() = meta["notes"].get<std::vector<std::string>>();
  for (const auto& e : meta["shortfalls"]) {
    Shortfall s;
    s.target = e["target"];
    s.requested = e["requested"];
    if (!e["achieved"].is_null()) s.achieved = e["achieved"].get<double>();
    s.dropped = e["dropped"];
    s.reason = e["reason"];
    ds.shortfalls().push_back(s);
  }

  std::ifstream manifest(dir / (name + "_manifest.csv"));
  std::ifstream px(dir / pixels_name(split), std::ios::binary);
  if (!manifest || !px) throw DatasetError("dataset files missing in " + dir.string());
  std::string line;
  std::getline(manifest, line);  // header
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw DatasetError("malformed manifest row: " + line);
    LabeledExample ex;
    ex.source_id = std::stoull(f[0]);
    ex.target = std::stoi(f[2]);
    ex.bias = std::stoi(f[3]);
    ex.provenance = parse_provenance(f[4]);
    const std::size_t row = std::stoull(f[5].substr(f[5].find('#') + 1));
    ex.pixels.resize(shape.size());
    px.seekg(static_cast<std::streamoff>(row * shape.size() * sizeof(double)));
    px.read(reinterpret_cast<char*>(ex.pixels.data()),
            static_cast<std::streamsize>(shape.size() * sizeof(double)));
    if (!px) throw DatasetError("pixel file truncated at row " + std::to_string(row));
    ds.add(std::move(ex));
  }
  return ds;
}

}  // namespace aeda::data
