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

// Alternating training of the representation phi, the density-ratio network
// w, the source head g_s and the target head g_t.
//
// After supervised pretraining of phi/g_s and a weight pretraining pass, each
// batch runs
//   (a) n_w steps on w minimizing the weighted marginal MMD of phi(X),
//   (b) n_g steps on g_s (source cross-entropy) and g_t (w-weighted source
//       cross-entropy),
//   (c) one step on phi minimizing the reweighted joint MMD of
//       (phi(X), Y) vs (phi(X_t), hard g_t labels) + lambda * source loss.
// w and the target labels are constants during (c).
//
// The baselines reuse the same loop: `marginal` matches phi(X) with unit
// weights, `class_conditional` uses label-only weights estimated once per
// epoch, `no_da` drops the matching term.

#include "hcs/baselines.hpp"
#include "hcs/config.hpp"
#include "hcs/data.hpp"
#include "hcs/mmd.hpp"
#include "hcs/nn.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

namespace hcs {

inline constexpr int kMetricsSchemaVersion = 1;

struct WeightStats {
  double min = 1.0;
  double max = 1.0;
  double mean = 1.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double phi_loss = 0.0;
  double weight_loss = 0.0;
  double supervised_loss = 0.0;
  double target_loss_estimate = 0.0;
  double objective = 0.0;
  double source_accuracy = 0.0;
  std::optional<double> target_accuracy;
  WeightStats weight_stats;
  std::optional<ClassRatio> class_ratio;
  std::size_t batches = 0;
  std::size_t skipped_batches = 0;
};

// phi(x) and w(phi(x)) on the fixed probe rows at one epoch.
struct Snapshot {
  std::size_t epoch = 0;
  Points phi_source;
  Points phi_target;
  Vector weight_source;
  Vector weight_target;
  Labels predicted_source;
  Labels predicted_target;
};

struct MetricsLog {
  std::vector<EpochRecord> epochs;
  std::vector<Snapshot> snapshots;
};

struct OptimizerSet {
  RmsPropState phi;
  RmsPropState w;
  RmsPropState g_s;
  RmsPropState g_t;
};

struct TrainedBundle {
  Mlp phi;
  Mlp w;
  Mlp g_s;
  Mlp g_t;
  TrainConfig config;
  MetricsLog metrics;

  KernelBank bank = KernelBank::default_bank();
  OptimizerSet optim;
  std::mt19937_64 rng;
  ClassRatio class_ratio;
  std::vector<std::size_t> probe_source;
  std::vector<std::size_t> probe_target;
  std::size_t epochs_done = 0;
};

// Epochs {1, ceil(E/3), ceil(2E/3), E}.
inline std::vector<std::size_t> snapshot_epochs(std::size_t epochs) {
  std::vector<std::size_t> out = {1, (epochs + 2) / 3, (2 * epochs + 2) / 3, epochs};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Prediction helpers

inline Points represent(const Mlp& phi, const Dataset& d, std::span<const std::size_t> rows) {
  return phi.forward(d.dense(rows));
}

// phi(x) for every row, densified in chunks.
inline Points represent_all(const Mlp& phi, const Dataset& d) {
  constexpr std::size_t kChunk = 1024;
  Points out(static_cast<Eigen::Index>(d.size()), phi.output_dim());
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < d.size(); begin += kChunk) {
    const std::size_t end = std::min(d.size(), begin + kChunk);
    rows.resize(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(rows.size())) =
        phi.forward(d.dense(rows));
  }
  return out;
}

// Probabilities of head(phi(x)) for every row.
inline Vector predict_proba(const Mlp& phi, const Mlp& head, const Dataset& d) {
  const Points p = head.forward(represent_all(phi, d));
  return Eigen::Map<const Vector>(p.data(), p.rows());
}

inline double accuracy(const Mlp& phi, const Mlp& head, const Dataset& d) {
  const Vector p = predict_proba(phi, head, d);
  const auto& y = d.labels();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if ((p(static_cast<Eigen::Index>(i)) >= 0.5 ? 1 : 0) == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

inline Labels predict_labels(const Mlp& phi, const Mlp& head, const Dataset& d) {
  const Vector p = predict_proba(phi, head, d);
  return harden({p.data(), static_cast<std::size_t>(p.size())});
}

namespace detail {

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

inline std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

inline std::vector<std::size_t> probe_rows(std::size_t n, std::size_t size, std::mt19937_64& rng) {
  auto idx = shuffled(n, rng);
  idx.resize(std::min(n, size));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::span<const std::size_t> slice(const std::vector<std::size_t>& v, std::size_t begin,
                                          std::size_t count) {
  return {v.data() + begin, count};
}

// One supervised step of a head on fixed representations.
inline double head_step(Mlp& head, RmsPropState& state, const Points& h, std::span<const int> y,
                        std::span<const double> w) {
  ForwardCache cache;
  const Points p = head.forward(h, cache);
  const LossValue loss = weighted_cross_entropy(column_span(p), y, w);
  check_finite(loss.value, "classifier loss");
  const MlpGradient g = head.backward(cache, Points(loss.grad));
  rmsprop_step(head, g, state);
  return loss.value;
}

// Supervised loss of head(h) and its gradient with respect to h.
inline double supervised_with_input_grad(const Mlp& head, const Points& h, std::span<const int> y,
                                         Points* grad_h) {
  ForwardCache cache;
  const Points p = head.forward(h, cache);
  const std::vector<double> ones(y.size(), 1.0);
  const LossValue loss = weighted_cross_entropy(column_span(p), y, ones);
  head.backward(cache, Points(loss.grad), grad_h);
  return loss.value;
}

inline void add_gradient(MlpGradient& into, const MlpGradient& g) {
  for (std::size_t l = 0; l < into.weight.size(); ++l) {
    into.weight[l] += g.weight[l];
    into.bias[l] += g.bias[l];
  }
}

inline void weight_step(TrainedBundle& b, const Points& hs, const WeightedMmdGram& cache) {
  const WeightPass pass = weight_model_forward(b.w, hs);
  const MmdValue v =
      cache.evaluate({pass.weights.data(), static_cast<std::size_t>(pass.weights.size())}, true,
                     b.config.weight_loss_term);
  check_finite(v.value, "weight loss");
  rmsprop_step(b.w, weight_model_backward(b.w, pass, *v.grad_weights), b.optim.w);
}

inline ClassRatio current_class_ratio(const TrainedBundle& b, const Dataset& source,
                                      const Dataset& target) {
  const Labels pred = predict_labels(b.phi, b.g_t, target);
  return estimate_class_ratio(pred, source.positive_rate(), 1.0);
}

// One step on phi: matching term (w and target pseudo-labels held fixed) plus
// lambda times the source loss of g_s.
inline void representation_step(TrainedBundle& b, const ForwardCache& cache_s, const Points& hs,
                                std::span<const int> ys, std::span<const double> w,
                                const ForwardCache& cache_t, const Points& ht);

}  // namespace detail

// w(h) scaled so that the whole source has unit mean weight; used for rows
// outside a training batch (probe sets, target rows).
inline Vector hcs_weights_on(const TrainedBundle& b, const Dataset& source, const Points& h) {
  const double mean = weight_model_forward(b.w, represent_all(b.phi, source)).mean;
  return weight_model_apply_relative(b.w, h, mean);
}

// Source-row weights used by the matching loss and by g_t's loss.
inline std::vector<double> mode_weights(const TrainedBundle& b, const Points& hs,
                                        std::span<const int> ys) {
  switch (b.config.mode) {
    case Mode::hcs: {
      const Vector w = weight_model_apply(b.w, hs);
      return {w.data(), w.data() + w.size()};
    }
    case Mode::class_conditional:
      return b.class_ratio.weights_for(ys);
    case Mode::marginal:
    case Mode::no_da:
      break;
  }
  return std::vector<double>(ys.size(), 1.0);
}

// The matching term of the representation objective for the bundle's mode.
inline MmdValue matching_loss(const TrainedBundle& b, const Points& hs, std::span<const int> ys,
                              std::span<const double> w, const Points& ht,
                              std::span<const int> yt_hat, MmdGradRequest req) {
  switch (b.config.mode) {
    case Mode::hcs:
      return joint_weighted_mmd_sq(b.bank, hs, ys, w, ht, yt_hat, req);
    case Mode::class_conditional:
      return class_conditional_loss(b.bank, hs, ys, b.class_ratio, ht, yt_hat, req);
    case Mode::marginal:
      return marginal_invariance_loss(b.bank, hs, ht, req);
    case Mode::no_da:
      break;
  }
  MmdValue zero;
  if (req.source) zero.grad_source = Points::Zero(hs.rows(), hs.cols());
  if (req.target) zero.grad_target = Points::Zero(ht.rows(), ht.cols());
  return zero;
}

// Losses of the current bundle on its probe rows.
struct ProbeEvaluation {
  double phi_loss = 0.0;
  double weight_loss = 0.0;
  double supervised_loss = 0.0;
  double target_loss_estimate = 0.0;
  double objective = 0.0;
  WeightStats weight_stats;
};

inline ProbeEvaluation evaluate_probe(const TrainedBundle& b, const Dataset& source,
                                      const Dataset& target) {
  const Points hs = represent(b.phi, source, b.probe_source);
  const Points ht = represent(b.phi, target, b.probe_target);
  const Labels ys = source.labels_at(b.probe_source);
  const std::vector<double> w = mode_weights(b, hs, ys);
  const Points pt = b.g_t.forward(ht);
  const Labels yt_hat = harden(column_span(pt));

  ProbeEvaluation e;
  e.phi_loss = matching_loss(b, hs, ys, w, ht, yt_hat, {}).value;
  e.weight_loss = weighted_mmd_sq(b.bank, hs, w, ht).value;
  const std::vector<double> ones(ys.size(), 1.0);
  e.supervised_loss = weighted_cross_entropy(column_span(b.g_s.forward(hs)), ys, ones).value;
  e.target_loss_estimate = weighted_cross_entropy(column_span(b.g_t.forward(hs)), ys, w).value;
  e.objective = e.phi_loss + b.config.lambda * e.supervised_loss;
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  e.weight_stats = {*lo, *hi, std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size())};
  return e;
}

inline Snapshot take_snapshot(const TrainedBundle& b, const Dataset& source, const Dataset& target) {
  Snapshot s;
  s.epoch = b.epochs_done;
  s.phi_source = represent(b.phi, source, b.probe_source);
  s.phi_target = represent(b.phi, target, b.probe_target);
  const Labels ys = source.labels_at(b.probe_source);
  if (b.config.mode == Mode::hcs) {
    s.weight_source = hcs_weights_on(b, source, s.phi_source);
    s.weight_target = hcs_weights_on(b, source, s.phi_target);
  } else if (b.config.mode == Mode::class_conditional) {
    const auto w = b.class_ratio.weights_for(ys);
    s.weight_source = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    s.weight_target = Vector::Ones(s.phi_target.rows());
  } else {
    s.weight_source = Vector::Ones(s.phi_source.rows());
    s.weight_target = Vector::Ones(s.phi_target.rows());
  }
  s.predicted_source = harden(column_span(b.g_s.forward(s.phi_source)));
  s.predicted_target = harden(column_span(b.g_t.forward(s.phi_target)));
  return s;
}

inline void detail::representation_step(TrainedBundle& b, const ForwardCache& cache_s,
                                        const Points& hs, std::span<const int> ys,
                                        std::span<const double> w, const ForwardCache& cache_t,
                                        const Points& ht) {
  Points grad_hs;
  const double sup = supervised_with_input_grad(b.g_s, hs, ys, &grad_hs);
  check_finite(sup, "supervised loss");
  grad_hs *= b.config.lambda;
  MlpGradient g_phi = b.phi.backward(cache_s, grad_hs);
  if (b.config.mode != Mode::no_da) {
    const Points pt = b.g_t.forward(ht);
    const Labels yt_hat = harden(column_span(pt));
    const MmdValue match = matching_loss(b, hs, ys, w, ht, yt_hat, {.source = true, .target = true});
    check_finite(match.value, "matching loss");
    add_gradient(g_phi, b.phi.backward(cache_s, *match.grad_source));
    add_gradient(g_phi, b.phi.backward(cache_t, *match.grad_target));
  }
  rmsprop_step(b.phi, g_phi, b.optim.phi);
}

// Initializes all networks: supervised pretraining of phi and g_s on the
// source, then (hcs mode) weight pretraining with phi frozen; g_t starts as a
// copy of g_s.
inline TrainedBundle pretrain(const Dataset& source, const Dataset& target,
                              const TrainConfig& config) {
  config.validate();
  if (!source.has_labels()) throw DataError("pretrain: source dataset must be labeled");
  if (source.size() < 2 || target.size() < 2) {
    throw DataError("pretrain: source and target need at least 2 samples each");
  }
  if (source.feature_dim() != target.feature_dim()) {
    throw DataError("pretrain: source and target feature dimensions differ");
  }

  TrainedBundle b;
  b.config = config;
  b.rng.seed(config.seed);
  b.phi = Mlp({source.feature_dim(), config.phi_hidden}, {config.phi_activation}, b.rng);
  b.g_s = Mlp({config.phi_hidden, 1}, {Activation::sigmoid}, b.rng);
  b.w = make_weight_net(config.phi_hidden, config.w_hidden_dims, b.rng);
  b.optim.phi.learning_rate = config.lr_phi;
  b.optim.w.learning_rate = config.lr_w;
  b.optim.g_s.learning_rate = config.lr_gs;
  b.optim.g_t.learning_rate = config.lr_gt;
  b.probe_source = detail::probe_rows(source.size(), config.probe_size, b.rng);
  b.probe_target = detail::probe_rows(target.size(), config.probe_size, b.rng);

  const std::size_t n = source.size();
  const std::size_t bs = std::min(config.batch_size, n);
  const std::vector<double> ones(bs, 1.0);
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const auto perm = detail::shuffled(n, b.rng);
    for (std::size_t begin = 0; begin + bs <= n; begin += bs) {
      const auto rows = detail::slice(perm, begin, bs);
      const Points x = source.dense(rows);
      const Labels y = source.labels_at(rows);
      ForwardCache phi_cache;
      const Points h = b.phi.forward(x, phi_cache);
      ForwardCache head_cache;
      const Points p = b.g_s.forward(h, head_cache);
      const LossValue loss = weighted_cross_entropy(column_span(p), y, ones);
      detail::check_finite(loss.value, "pretraining loss");
      Points grad_h;
      const MlpGradient g_head = b.g_s.backward(head_cache, Points(loss.grad), &grad_h);
      const MlpGradient g_phi = b.phi.backward(phi_cache, grad_h);
      rmsprop_step(b.g_s, g_head, b.optim.g_s);
      rmsprop_step(b.phi, g_phi, b.optim.phi);
    }
  }

  if (config.mode == Mode::hcs) {
    const std::size_t m = target.size();
    const std::size_t pair = std::min({config.batch_size, n, m});
    for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
      const auto perm_s = detail::shuffled(n, b.rng);
      const auto perm_t = detail::shuffled(m, b.rng);
      for (std::size_t begin = 0; begin + pair <= std::min(n, m); begin += pair) {
        const Points hs = represent(b.phi, source, detail::slice(perm_s, begin, pair));
        const Points ht = represent(b.phi, target, detail::slice(perm_t, begin, pair));
        const WeightedMmdGram cache(b.bank, hs, ht);
        for (std::size_t k = 0; k < config.n_w; ++k) detail::weight_step(b, hs, cache);
      }
    }
  }

  b.g_t = b.g_s;
  if (config.mode == Mode::class_conditional) {
    b.class_ratio = detail::current_class_ratio(b, source, target);
  }
  return b;
}

// One pass over paired source/target batches; appends and returns the epoch
// record (and a snapshot when the epoch is a snapshot epoch).
inline EpochRecord train_epoch(TrainedBundle& b, const Dataset& source, const Dataset& target,
                               bool with_snapshots = true) {
  const TrainConfig& cfg = b.config;
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  std::size_t bs = cfg.batch_size;
  std::size_t batches = std::min(n, m) / bs;
  std::size_t skipped = 0;
  if (batches == 0) {
    // Smaller than one batch: train on everything available, if possible.
    bs = std::min(n, m);
    batches = bs >= 2 ? 1 : 0;
    if (batches == 0) skipped = 1;
  }

  if (cfg.mode == Mode::class_conditional) b.class_ratio = detail::current_class_ratio(b, source, target);

  const auto perm_s = detail::shuffled(n, b.rng);
  const auto perm_t = detail::shuffled(m, b.rng);
  for (std::size_t k = 0; k < batches; ++k) {
    const auto rows_s = detail::slice(perm_s, k * bs, bs);
    const auto rows_t = detail::slice(perm_t, k * bs, bs);
    const Points xs = source.dense(rows_s);
    const Points xt = target.dense(rows_t);
    const Labels ys = source.labels_at(rows_s);

    ForwardCache cache_s;
    ForwardCache cache_t;
    const Points hs = b.phi.forward(xs, cache_s);
    const Points ht = b.phi.forward(xt, cache_t);

    // (a) density ratio in representation space
    if (cfg.mode == Mode::hcs) {
      const WeightedMmdGram gram_cache(b.bank, hs, ht);
      for (std::size_t i = 0; i < cfg.n_w; ++i) detail::weight_step(b, hs, gram_cache);
    }

    // (b) classifier heads
    const std::vector<double> w = mode_weights(b, hs, ys);
    const std::vector<double> ones(bs, 1.0);
    for (std::size_t i = 0; i < cfg.n_g; ++i) {
      detail::head_step(b.g_s, b.optim.g_s, hs, ys, ones);
      detail::head_step(b.g_t, b.optim.g_t, hs, ys, w);
    }

    // (c) representation
    detail::representation_step(b, cache_s, hs, ys, w, cache_t, ht);
  }

  ++b.epochs_done;
  const ProbeEvaluation e = evaluate_probe(b, source, target);
  EpochRecord r;
  r.epoch = b.epochs_done;
  r.phi_loss = e.phi_loss;
  r.weight_loss = e.weight_loss;
  r.supervised_loss = e.supervised_loss;
  r.target_loss_estimate = e.target_loss_estimate;
  r.objective = e.objective;
  detail::check_finite(r.objective, "objective");
  r.source_accuracy = accuracy(b.phi, b.g_s, source);
  if (target.has_labels()) r.target_accuracy = accuracy(b.phi, b.g_t, target);
  r.weight_stats = e.weight_stats;
  if (cfg.mode == Mode::class_conditional) r.class_ratio = b.class_ratio;
  r.batches = batches;
  r.skipped_batches = skipped;
  b.metrics.epochs.push_back(r);

  if (with_snapshots) {
    const auto marks = snapshot_epochs(cfg.epochs);
    if (std::find(marks.begin(), marks.end(), b.epochs_done) != marks.end()) {
      b.metrics.snapshots.push_back(take_snapshot(b, source, target));
    }
  }
  return r;
}

// Pretraining followed by a fixed number of epochs.
inline TrainedBundle fit(const Dataset& source, const Dataset& target, const TrainConfig& config,
                         bool with_snapshots = true) {
  TrainedBundle b = pretrain(source, target, config);
  for (std::size_t e = 0; e < config.epochs; ++e) train_epoch(b, source, target, with_snapshots);
  return b;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const EpochRecord& r) {
  nlohmann::json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["epoch"] = r.epoch;
  j["phi_loss"] = r.phi_loss;
  j["weight_loss"] = r.weight_loss;
  j["supervised_loss"] = r.supervised_loss;
  j["target_loss_estimate"] = r.target_loss_estimate;
  j["objective"] = r.objective;
  j["source_accuracy"] = r.source_accuracy;
  j["target_accuracy"] = r.target_accuracy ? nlohmann::json(*r.target_accuracy) : nlohmann::json();
  j["weight_stats"] = {{"min", r.weight_stats.min},
                       {"max", r.weight_stats.max},
                       {"mean", r.weight_stats.mean}};
  j["class_ratio"] = r.class_ratio
                         ? nlohmann::json{{"w0", r.class_ratio->w0}, {"w1", r.class_ratio->w1}}
                         : nlohmann::json();
  j["batches"] = r.batches;
  j["skipped_batches"] = r.skipped_batches;
  return j;
}

inline void write_metrics_jsonl(std::ostream& os, const MetricsLog& log) {
  for (const auto& r : log.epochs) os << to_json(r).dump() << '\n';
}

// Columns: sample_id, domain, phi_0..phi_{d-1}, weight, true_label, predicted_label.
inline void write_snapshot_csv(std::ostream& os, const Snapshot& s, const Dataset& source,
                               const Dataset& target, const std::vector<std::size_t>& probe_s,
                               const std::vector<std::size_t>& probe_t) {
  os << "sample_id,domain";
  for (Eigen::Index k = 0; k < s.phi_source.cols(); ++k) os << ",phi_" << k;
  os << ",weight,true_label,predicted_label\n";
  auto emit = [&](const Dataset& d, const std::vector<std::size_t>& rows, const Points& phi,
                  const Vector& w, const Labels& pred) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      os << d.ids()[rows[r]] << ',' << d.domain_tag();
      for (Eigen::Index k = 0; k < phi.cols(); ++k) os << ',' << format_double(phi(i, k));
      os << ',' << format_double(w(i)) << ',';
      if (d.has_labels()) os << d.labels()[rows[r]];
      os << ',' << pred[r] << '\n';
    }
  };
  emit(source, probe_s, s.phi_source, s.weight_source, s.predicted_source);
  emit(target, probe_t, s.phi_target, s.weight_target, s.predicted_target);
}

// Bundle checkpoint: "HCSB" | u32 version | u64 config-json length | config
// json | phi | w | g_s | g_t (each an Mlp binary record).
inline void save_bundle(std::ostream& os, const TrainedBundle& b) {
  os.write("HCSB", 4);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  const std::string cfg = to_json(b.config).dump();
  detail::write_le<std::uint64_t>(os, cfg.size());
  os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  save_binary(os, b.phi);
  save_binary(os, b.w);
  save_binary(os, b.g_s);
  save_binary(os, b.g_t);
}

inline TrainedBundle load_bundle(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != "HCSB") {
    throw DataError("bundle checkpoint: bad magic");
  }
  if (detail::read_le<std::uint32_t>(is) != kCheckpointVersion) {
    throw DataError("bundle checkpoint: unsupported version");
  }
  const auto len = detail::read_le<std::uint64_t>(is);
  if (len > (1u << 24)) throw DataError("bundle checkpoint: config record too large");
  std::string cfg(len, '\0');
  if (!is.read(cfg.data(), static_cast<std::streamsize>(len))) {
    throw DataError("bundle checkpoint: truncated config");
  }
  TrainedBundle b;
  try {
    b.config = train_config_from_json(nlohmann::json::parse(cfg));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bundle checkpoint: ") + e.what());
  }
  b.phi = load_binary(is);
  b.w = load_binary(is);
  b.g_s = load_binary(is);
  b.g_t = load_binary(is);
  return b;
}

}  // namespace hcs
