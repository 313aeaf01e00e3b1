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

#ifndef AEDA_TESTS_FIXTURES_HPP_
#define AEDA_TESTS_FIXTURES_HPP_

#include <string>
#include <utility>

#include "aeda/data/corpus.hpp"
#include "aeda/data/dataset.hpp"
#include "aeda/data/synth.hpp"
#include "aeda/nn/composite.hpp"

namespace aeda::testing {

inline std::string corpus_path() { return std::string(AEDA_DATA_DIR) + "/mnist_5k.csv.gz"; }

// 7x7 digits, a few per class, cached across tests.
inline const data::GrayscaleCorpus& small_corpus() {
  static const data::GrayscaleCorpus corpus = [] {
    data::CorpusSpec spec;
    spec.path = corpus_path();
    spec.downsample = 4;
    spec.max_train_per_class = 24;
    spec.max_test_per_class = 10;
    return data::load_corpus(spec);
  }();
  return corpus;
}

inline std::pair<data::GroupedDataset, data::GroupedDataset> small_cmnist(
    const data::RatioPlan& plan, std::uint64_t seed = 3) {
  return data::build_cmnist(small_corpus(), data::ColorSpec{}, plan, seed);
}

inline nn::Architecture tiny_arch() {
  nn::Architecture a;
  a.preset = "tiny";
  a.input = nn::Shape{7, 7, 3};
  a.feature_dim = 16;
  a.num_classes = 10;
  return a;
}

// Dataset built by hand: `cells[t][b]` originals of class t with bias b.
inline data::GroupedDataset counted_dataset(const std::vector<std::array<int, 2>>& cells,
                                            nn::Shape shape = nn::Shape{2, 2, 3}) {
  data::GroupedDataset ds(data::Split::kTrain, shape, static_cast<int>(cells.size()));
  std::uint64_t id = 0;
  for (int t = 0; t < static_cast<int>(cells.size()); ++t) {
    for (int b = 0; b < 2; ++b) {
      for (int i = 0; i < cells[t][b]; ++i) {
        std::vector<double> px(shape.size(), 0.05 * static_cast<double>((id % 17) + 1));
        ds.add({id++, t, b, data::Provenance::kOriginal, std::move(px)});
      }
    }
  }
  return ds;
}

}  // namespace aeda::testing

#endif  // AEDA_TESTS_FIXTURES_HPP_
