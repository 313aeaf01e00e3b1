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

#ifndef AEDA_DATA_CORPUS_HPP_
#define AEDA_DATA_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace aeda::data {

struct GrayImage {
  std::uint64_t source_id = 0;
  int label = 0;
  std::vector<double> pixels;  // row-major, [0,1]
};

// A grayscale digit corpus with train and test splits.
struct GrayscaleCorpus {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<GrayImage> train;
  std::vector<GrayImage> test;
};

struct CorpusSpec {
  // "csv": one image per line, 0-255 intensities plus an integer label
  //        (gzip or plain); split into train/test by `test_fraction`.
  // "idx": the four MNIST IDX files (gzip or plain) inside `path`.
  std::string format = "csv";
  std::string path;
  std::string label_column = "last";  // csv only: "first" or "last"
  int side = 28;                      // csv only: images are side x side
  double test_fraction = 0.2;         // csv only, stratified per class
  int downsample = 1;                 // average-pool factor applied on load
  int max_train_per_class = 0;        // 0: no cap
  int max_test_per_class = 0;

  friend bool operator==(const CorpusSpec&, const CorpusSpec&) = default;
};

// Throws std::runtime_error on unreadable or malformed input.
GrayscaleCorpus load_corpus(const CorpusSpec& spec);

// Block-average downsampling of a row-major image; trailing partial blocks
// are dropped.
std::vector<double> downsample_image(const std::vector<double>& pixels, int height,
                                     int width, int factor);

}  // namespace aeda::data

#endif  // AEDA_DATA_CORPUS_HPP_
