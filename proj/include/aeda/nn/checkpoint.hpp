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

#ifndef AEDA_NN_CHECKPOINT_HPP_
#define AEDA_NN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "aeda/nn/composite.hpp"

namespace aeda::nn {

// JSON text for an architecture; layers are listed explicitly so a reader
// does not need the preset table.
std::string architecture_json(const Architecture& arch);
Architecture parse_architecture_json(const std::string& text);

// Binary layout: "AEDACKP1", u64 header length, JSON header, then the raw
// float64 parameters of each partition in partition order.
void save_checkpoint(const CompositeClassifier& model, const std::filesystem::path& path);
CompositeClassifier load_checkpoint(const std::filesystem::path& path);

// FNV-1a over all partitions in order.
std::uint64_t model_hash(const CompositeClassifier& model);

}  // namespace aeda::nn

#endif  // AEDA_NN_CHECKPOINT_HPP_
