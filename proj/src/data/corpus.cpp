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

#include "aeda/data/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aeda::data {

namespace {

// Reads a whole file, inflating it when gzip-compressed.
std::string read_maybe_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("cannot open corpus file " + path);
  std::string out;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw std::runtime_error("error while reading " + path);
  return out;
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw std::runtime_error("truncated IDX header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

std::string find_idx(const std::string& dir, const std::string& stem) {
  for (const char* suffix : {"", ".gz"}) {
    std::filesystem::path p = std::filesystem::path(dir) / (stem + suffix);
    if (std::filesystem::exists(p)) return p.string();
  }
  throw std::runtime_error("IDX file " + stem + " not found in " + dir);
}

std::vector<GrayImage> read_idx_pair(const std::string& dir, const std::string& prefix,
                                     std::uint64_t id_base, int& height, int& width) {
  const std::string images = read_maybe_gzip(find_idx(dir, prefix + "-images-idx3-ubyte"));
  const std::string labels = read_maybe_gzip(find_idx(dir, prefix + "-labels-idx1-ubyte"));
  if (read_be32(images, 0) != 0x803 || read_be32(labels, 0) != 0x801) {
    throw std::runtime_error("bad IDX magic in " + dir);
  }
  const std::uint32_t n = read_be32(images, 4);
  height = static_cast<int>(read_be32(images, 8));
  width = static_cast<int>(read_be32(images, 12));
  if (read_be32(labels, 4) != n) throw std::runtime_error("IDX image/label count mismatch");
  const std::size_t px = static_cast<std::size_t>(height) * width;
  if (images.size() < 16 + n * px || labels.size() < 8 + n) {
    throw std::runtime_error("truncated IDX payload");
  }
  std::vector<GrayImage> out(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    out[i].source_id = id_base + i;
    out[i].label = static_cast<unsigned char>(labels[8 + i]);
    out[i].pixels.resize(px);
    for (std::size_t k = 0; k < px; ++k) {
      out[i].pixels[k] = static_cast<unsigned char>(images[16 + i * px + k]) / 255.0;
    }
  }
  return out;
}

std::vector<GrayImage> read_csv(const CorpusSpec& spec) {
  const std::string text = read_maybe_gzip(spec.path);
  const std::size_t px = static_cast<std::size_t>(spec.side) * spec.side;
  const bool label_first = spec.label_column == "first";
  if (!label_first && spec.label_column != "last") {
    throw std::runtime_error("label_column must be 'first' or 'last'");
  }
  std::vector<GrayImage> out;
  std::istringstream lines(text);
  std::string line;
  std::vector<double> values;
  std::uint64_t row = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line == "\r") continue;
    values.clear();
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      values.push_back(std::stod(line.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    if (values.size() != px + 1) {
      throw std::runtime_error("csv row " + std::to_string(row) + " has " +
                               std::to_string(values.size()) + " fields, expected " +
                               std::to_string(px + 1));
    }
    GrayImage img;
    img.source_id = row++;
    img.label = static_cast<int>(label_first ? values.front() : values.back());
    const std::size_t start = label_first ? 1 : 0;
    img.pixels.resize(px);
    for (std::size_t k = 0; k < px; ++k) {
      img.pixels[k] = std::clamp(values[start + k] / 255.0, 0.0, 1.0);
    }
    out.push_back(std::move(img));
  }
  return out;
}

void cap_per_class(std::vector<GrayImage>& images, int cap) {
  if (cap <= 0) return;
  std::map<int, int> seen;
  std::vector<GrayImage> kept;
  for (GrayImage& img : images) {
    if (seen[img.label]++ < cap) kept.push_back(std::move(img));
  }
  images = std::move(kept);
}

}  // namespace

std::vector<double> downsample_image(const std::vector<double>& pixels, int height,
                                     int width, int factor) {
  if (factor <= 1) return pixels;
  const int h = height / factor;
  const int w = width / factor;
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          s += pixels[static_cast<std::size_t>(y * factor + dy) * width + x * factor + dx];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = s * norm;
    }
  }
  return out;
}

GrayscaleCorpus load_corpus(const CorpusSpec& spec) {
  GrayscaleCorpus corpus;
  if (spec.format == "idx") {
    int h = 0, w = 0, th = 0, tw = 0;
    corpus.train = read_idx_pair(spec.path, "train", 0, h, w);
    corpus.test = read_idx_pair(spec.path, "t10k", 1'000'000, th, tw);
    if (h != th || w != tw) throw std::runtime_error("train/test image sizes differ");
    corpus.height = h;
    corpus.width = w;
  } else if (spec.format == "csv") {
    if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0) {
      throw std::runtime_error("test_fraction must lie in (0,1)");
    }
    std::vector<GrayImage> all = read_csv(spec);
    corpus.height = corpus.width = spec.side;
    // Stratified split: the last test_fraction of each class (file order)
    // becomes the test split.
    std::map<int, std::size_t> per_class;
    for (const GrayImage& img : all) ++per_class[img.label];
    std::map<int, std::size_t> seen;
    for (GrayImage& img : all) {
      const std::size_t n = per_class[img.label];
      const auto n_train = n - static_cast<std::size_t>(spec.test_fraction * n + 0.5);
      if (seen[img.label]++ < n_train) {
        corpus.train.push_back(std::move(img));
      } else {
        corpus.test.push_back(std::move(img));
      }
    }
  } else {
    throw std::runtime_error("unknown corpus format '" + spec.format + "'");
  }

  cap_per_class(corpus.train, spec.max_train_per_class);
  cap_per_class(corpus.test, spec.max_test_per_class);

  int max_label = -1;
  for (const auto* split : {&corpus.train, &corpus.test}) {
    for (const GrayImage& img : *split) {
      if (img.label < 0) throw std::runtime_error("negative digit label in corpus");
      max_label = std::max(max_label, img.label);
    }
  }
  corpus.num_classes = max_label + 1;

  if (spec.downsample > 1) {
    for (auto* split : {&corpus.train, &corpus.test}) {
      for (GrayImage& img : *split) {
        img.pixels = downsample_image(img.pixels, corpus.height, corpus.width, spec.downsample);
      }
    }
    corpus.height /= spec.downsample;
    corpus.width /= spec.downsample;
  }
  return corpus;
}

}  // namespace aeda::data
