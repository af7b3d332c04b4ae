/*
 * Copyright 2026 The hcs Authors.
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

#pragma once

// Synthetic bag-of-words sentiment pair over a 5000-word vocabulary.
//
// Vocabulary blocks:
//   [0, 100)       positive pivots, same meaning in both domains
//   [100, 200)     negative pivots
//   [200, 300)     drift block A: positive in the source, negative in the target
//   [300, 400)     drift block B: the reverse
//   [400, 2500)    shared background
//   [2500, 3750)   source-only background
//   [3750, 5000)   target-only background

#include <map>
#include <random>

#include "hcs/data.hpp"

namespace proxy {

struct Params {
  std::size_t vocab = 5000;
  std::size_t pivot_words = 4;      // sentiment pivots per document
  double pivot_fidelity = 0.75;     // chance a pivot matches the class
  std::size_t drift_words = 3;
  double drift_fidelity = 0.7;
  std::size_t background_words = 30;
  double domain_background = 0.4;   // share of background drawn from the domain block
};

inline hcs::Dataset generate(std::mt19937_64& rng, std::size_t n, double p_pos, bool target,
                             const std::string& tag, const Params& p = {}) {
  std::bernoulli_distribution pos(p_pos);
  std::bernoulli_distribution pivot_ok(p.pivot_fidelity);
  std::bernoulli_distribution drift_ok(p.drift_fidelity);
  std::bernoulli_distribution domain_bg(p.domain_background);
  auto in = [&rng](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi - 1)(rng);
  };
  std::vector<hcs::SparseVector> rows;
  hcs::Labels labels;
  rows.reserve(n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = pos(rng) ? 1 : 0;
    std::map<std::size_t, double> counts;
    for (std::size_t k = 0; k < p.pivot_words; ++k) {
      const bool positive_word = pivot_ok(rng) == (y == 1);
      counts[positive_word ? in(0, 100) : in(100, 200)] += 1.0;
    }
    for (std::size_t k = 0; k < p.drift_words; ++k) {
      const bool class_word = drift_ok(rng);
      // Block A carries the positive class in the source, the negative one in the target.
      const bool block_a = (class_word == (y == 1)) != target;
      counts[block_a ? in(200, 300) : in(300, 400)] += 1.0;
    }
    for (std::size_t k = 0; k < p.background_words; ++k) {
      std::size_t w;
      if (domain_bg(rng)) w = target ? in(3750, 5000) : in(2500, 3750);
      else w = in(400, 2500);
      counts[w] += 1.0;
    }
    hcs::SparseVector row;
    for (const auto& [idx, c] : counts) {
      row.index.push_back(static_cast<std::uint32_t>(idx));
      row.value.push_back(c);
    }
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  return hcs::Dataset(p.vocab, std::move(rows), std::move(labels), tag);
}

}  // namespace proxy
