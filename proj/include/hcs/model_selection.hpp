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

// Hidden reverse validation: pseudo-label the target with g_t, retrain only a
// fresh source head on the target with inverse density-ratio weights (phi and
// w frozen), and score that head against the true source labels.

#include "hcs/trainer.hpp"

#include <future>

namespace hcs {

struct ReverseValidation {
  double score = 0.0;            // accuracy of the reversed head on the source
  std::size_t clamped = 0;       // target rows whose weight hit the floor
  std::size_t updates = 0;       // optimizer steps taken by the reversed head
  Mlp reversed_head;
};

inline ReverseValidation hidden_reverse_validation(const TrainedBundle& b, const Dataset& source,
                                                   const Dataset& target) {
  if (!source.has_labels()) throw DataError("reverse validation: source must be labeled");
  const TrainConfig& cfg = b.config;
  ReverseValidation out;

  const Points ht = represent_all(b.phi, target);
  const Labels pseudo = predict_labels(b.phi, b.g_t, target);

  // Inverse weights on the source-normalized scale.
  std::vector<double> inv_w(target.size(), 1.0);
  if (cfg.mode == Mode::hcs) {
    const Vector wt = hcs_weights_on(b, source, ht);
    for (std::size_t i = 0; i < inv_w.size(); ++i) {
      double w = wt(static_cast<Eigen::Index>(i));
      if (w < cfg.weight_floor) {
        w = cfg.weight_floor;
        ++out.clamped;
      }
      inv_w[i] = 1.0 / w;
    }
  } else if (cfg.mode == Mode::class_conditional) {
    for (std::size_t i = 0; i < inv_w.size(); ++i) {
      double w = b.class_ratio(pseudo[i]);
      if (w < cfg.weight_floor) {
        w = cfg.weight_floor;
        ++out.clamped;
      }
      inv_w[i] = 1.0 / w;
    }
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Mlp head({cfg.phi_hidden, 1}, {Activation::sigmoid}, rng);
  RmsPropState state;
  state.learning_rate = cfg.lr_gs;
  const std::size_t m = target.size();
  const std::size_t bs = std::min(cfg.batch_size, m);
  for (std::size_t epoch = 0; epoch < cfg.reverse_epochs; ++epoch) {
    const auto perm = detail::shuffled(m, rng);
    for (std::size_t begin = 0; begin + bs <= m; begin += bs) {
      const auto rows = detail::slice(perm, begin, bs);
      Points h(static_cast<Eigen::Index>(bs), ht.cols());
      Labels y(bs);
      std::vector<double> w(bs);
      for (std::size_t k = 0; k < bs; ++k) {
        h.row(static_cast<Eigen::Index>(k)) = ht.row(static_cast<Eigen::Index>(rows[k]));
        y[k] = pseudo[rows[k]];
        w[k] = inv_w[rows[k]];
      }
      detail::head_step(head, state, h, y, w);
      ++out.updates;
    }
  }
  out.score = accuracy(b.phi, head, source);
  out.reversed_head = std::move(head);
  return out;
}

inline double hidden_reverse_validate(const TrainedBundle& b, const Dataset& source,
                                      const Dataset& target) {
  return hidden_reverse_validation(b, source, target).score;
}

struct Candidate {
  TrainConfig config;
  std::optional<double> reverse_score;  // empty when the run failed
  std::optional<double> source_accuracy;
  std::optional<double> target_accuracy;
  std::string error;
};

struct SelectionReport {
  std::vector<Candidate> candidates;
  std::optional<std::size_t> chosen;
};

// Highest reverse score; ties go to the smaller lambda, then the smaller seed.
inline std::optional<std::size_t> choose_candidate(const std::vector<Candidate>& c) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].reverse_score) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = c[i];
    const auto& b = c[*best];
    const bool better =
        *a.reverse_score > *b.reverse_score ||
        (*a.reverse_score == *b.reverse_score &&
         (a.config.lambda < b.config.lambda ||
          (a.config.lambda == b.config.lambda && a.config.seed < b.config.seed)));
    if (better) best = i;
  }
  return best;
}

// One fit per (lambda, seed), lambda-major. Fits are independent and run
// concurrently when `parallel` is set; results do not depend on it.
inline SelectionReport sweep(const Dataset& source, const Dataset& target,
                             const std::vector<double>& lambdas,
                             const std::vector<std::uint64_t>& seeds, const TrainConfig& base,
                             bool parallel = false) {
  require(!lambdas.empty() && !seeds.empty(), "sweep: empty grid");
  std::vector<TrainConfig> configs;
  for (double l : lambdas) {
    for (auto s : seeds) {
      TrainConfig c = base;
      c.lambda = l;
      c.seed = s;
      configs.push_back(c);
    }
  }
  auto run = [&source, &target](const TrainConfig& c) {
    Candidate cand;
    cand.config = c;
    try {
      const TrainedBundle b = fit(source, target, c, false);
      const double score = hidden_reverse_validate(b, source, target);
      if (!std::isfinite(score)) throw NumericalError("non-finite reverse score");
      cand.reverse_score = score;
      cand.source_accuracy = accuracy(b.phi, b.g_s, source);
      if (target.has_labels()) cand.target_accuracy = accuracy(b.phi, b.g_t, target);
    } catch (const std::exception& e) {
      cand.reverse_score.reset();
      cand.error = e.what();
    }
    return cand;
  };
  SelectionReport report;
  if (parallel) {
    std::vector<std::future<Candidate>> jobs;
    for (const auto& c : configs) jobs.push_back(std::async(std::launch::async, run, c));
    for (auto& j : jobs) report.candidates.push_back(j.get());
  } else {
    for (const auto& c : configs) report.candidates.push_back(run(c));
  }
  report.chosen = choose_candidate(report.candidates);
  return report;
}

inline nlohmann::json to_json(const SelectionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : r.candidates) {
    nlohmann::json row = {{"config", to_json(c.config)},
                          {"reverse_score", opt(c.reverse_score)},
                          {"source_accuracy", opt(c.source_accuracy)},
                          {"target_accuracy", opt(c.target_accuracy)}};
    if (!c.error.empty()) row["error"] = c.error;
    rows.push_back(row);
  }
  return {{"schema_version", kMetricsSchemaVersion},
          {"candidates", rows},
          {"chosen", r.chosen ? nlohmann::json(*r.chosen) : nlohmann::json()}};
}

}  // namespace hcs
