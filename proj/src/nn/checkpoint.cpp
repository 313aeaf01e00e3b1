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

#include "aeda/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <variant>

#include "json.hpp"
#include "aeda/util.hpp"

namespace aeda::nn {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'A', 'E', 'D', 'A', 'C', 'K', 'P', '1'};

json layer_to_json(const LayerSpec& spec) {
  return std::visit(
      [](const auto& l) -> json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Conv2d>) {
          return {{"type", "conv"}, {"out_channels", l.out_channels}, {"kernel", l.kernel},
                  {"padding", l.padding}};
        } else if constexpr (std::is_same_v<L, Relu>) {
          return {{"type", "relu"}};
        } else if constexpr (std::is_same_v<L, MaxPool2d>) {
          return {{"type", "maxpool"}, {"size", l.size}};
        } else {
          return {{"type", "dense"}, {"out_features", l.out_features}};
        }
      },
      spec);
}

LayerSpec layer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv") {
    return Conv2d{j.at("out_channels").get<int>(), j.at("kernel").get<int>(),
                  j.at("padding").get<int>()};
  }
  if (type == "relu") return Relu{};
  if (type == "maxpool") return MaxPool2d{j.at("size").get<int>()};
  if (type == "dense") return Dense{j.at("out_features").get<int>()};
  throw std::runtime_error("unknown layer type '" + type + "'");
}

json arch_to_json(const Architecture& arch) {
  json layers = json::array();
  for (const LayerSpec& l : arch.extractor) layers.push_back(layer_to_json(l));
  return {{"preset", arch.preset},
          {"input", {arch.input.height, arch.input.width, arch.input.channels}},
          {"feature_dim", arch.feature_dim},
          {"num_classes", arch.num_classes},
          {"head_hidden", arch.head_hidden},
          {"extractor", layers}};
}

Architecture arch_from_json(const json& j) {
  Architecture a;
  a.preset = j.at("preset").get<std::string>();
  const auto& in = j.at("input");
  a.input = Shape{in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
  a.feature_dim = j.at("feature_dim").get<int>();
  a.num_classes = j.at("num_classes").get<int>();
  a.head_hidden = j.at("head_hidden").get<int>();
  for (const json& l : j.at("extractor")) a.extractor.push_back(layer_from_json(l));
  return a;
}

}  // namespace

std::string architecture_json(const Architecture& arch) {
  return arch_to_json(resolve_architecture(arch)).dump();
}

Architecture parse_architecture_json(const std::string& text) {
  return arch_from_json(json::parse(text));
}

void save_checkpoint(const CompositeClassifier& model, const std::filesystem::path& path) {
  json header = {{"architecture", arch_to_json(model.architecture())}};
  json sizes = json::array();
  for (Partition p : kAllPartitions) sizes.push_back(model.network(p).num_parameters());
  header["partition_sizes"] = sizes;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Partition p : kAllPartitions) {
    auto params = model.network(p).parameters();
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

CompositeClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1u << 24)) throw std::runtime_error("corrupt checkpoint header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const json header = json::parse(text);
  CompositeClassifier model(arch_from_json(header.at("architecture")), 0);
  const json& sizes = header.at("partition_sizes");
  for (Partition p : kAllPartitions) {
    auto params = model.network(p).parameters();
    if (sizes.at(static_cast<int>(p)).get<std::size_t>() != params.size()) {
      throw std::runtime_error("checkpoint partition size does not match architecture");
    }
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint " + path.string());
  return model;
}

std::uint64_t model_hash(const CompositeClassifier& model) {
  std::uint64_t h = kFnvOffset;
  for (Partition p : kAllPartitions) {
    auto params = model.network(p).parameters();
    h = fnv1a(params.data(), params.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace aeda::nn
