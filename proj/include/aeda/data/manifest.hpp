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

#ifndef AEDA_DATA_MANIFEST_HPP_
#define AEDA_DATA_MANIFEST_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "aeda/data/dataset.hpp"

namespace aeda::data {

// On-disk layout of one split inside a dataset directory:
//   <split>_manifest.csv  source_id,split,target,bias,provenance,tensor_ref
//                         sorted by (source_id, provenance)
//   <split>_pixels.bin    little-endian float64 samples, HWC, manifest order;
//                         tensor_ref is "<split>_pixels.bin#<row>"
//   <split>_meta.json     image shape, class count, notes, shortfalls
// Returns the written paths.
std::vector<std::filesystem::path> write_dataset(const GroupedDataset& dataset,
                                                 const std::filesystem::path& dir);

GroupedDataset read_dataset(const std::filesystem::path& dir, Split split);

// Manifest rows only (no pixels), in the same order as write_dataset.
std::string manifest_text(const GroupedDataset& dataset);

}  // namespace aeda::data

#endif  // AEDA_DATA_MANIFEST_HPP_
