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

#include "hcs/data.hpp"
#include "hcs/mmd.hpp"
#include "hcs/nn.hpp"

#include <json.hpp>

#include <optional>
#include <set>

namespace hcs {

enum class Mode { hcs, marginal, class_conditional, no_da };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::hcs: return "hcs";
    case Mode::marginal: return "marginal";
    case Mode::class_conditional: return "class_conditional";
    case Mode::no_da: return "no_da";
  }
  return "hcs";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "hcs") return Mode::hcs;
  if (s == "marginal") return Mode::marginal;
  if (s == "class_conditional") return Mode::class_conditional;
  if (s == "no_da") return Mode::no_da;
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

inline std::string_view source_term_name(SourceTerm t) {
  return t == SourceTerm::unbiased ? "unbiased" : "v_statistic";
}

inline SourceTerm parse_source_term(std::string_view s) {
  if (s == "unbiased") return SourceTerm::unbiased;
  if (s == "v_statistic") return SourceTerm::v_statistic;
  throw std::invalid_argument("unknown weight loss estimator: " + std::string(s));
}

// Hyper-parameters of one training run. Defaults follow the bag-of-words
// setup: tanh representation of width 50, two hidden layers of 10 for the
// weight network, RMSProp at 0.001 for the representation and 0.01 elsewhere,
// batches of 128, five inner weight/classifier steps, 30 epochs.
struct TrainConfig {
  double lambda = 0.1;
  double lr_phi = 0.001;
  double lr_w = 0.01;
  double lr_gs = 0.01;
  double lr_gt = 0.01;
  std::size_t batch_size = 128;
  std::size_t n_w = 5;
  std::size_t n_g = 5;
  std::size_t epochs = 30;
  std::size_t pretrain_epochs = 5;
  std::uint64_t seed = 0;
  Mode mode = Mode::hcs;
  std::size_t phi_hidden = 50;
  Activation phi_activation = Activation::tanh;
  std::vector<std::size_t> w_hidden_dims = {10, 10};
  // Fixed per-fit probe subsets used for logged losses and snapshots.
  std::size_t probe_size = 256;
  // Source-source form of the loss minimized by the weight steps.
  SourceTerm weight_loss_term = SourceTerm::v_statistic;
  // Reverse validation.
  std::size_t reverse_epochs = 10;
  double weight_floor = 1e-3;

  void validate() const {
    require(lambda >= 0.0, "config: lambda must be non-negative");
    require(lr_phi > 0 && lr_w > 0 && lr_gs > 0 && lr_gt > 0,
            "config: learning rates must be positive");
    require(batch_size > 0 && n_w > 0 && n_g > 0 && epochs > 0 && pretrain_epochs > 0,
            "config: counts must be positive");
    require(phi_hidden > 0, "config: phi_hidden must be positive");
    for (auto d : w_hidden_dims) require(d > 0, "config: w_hidden_dims must be positive");
    require(probe_size >= 2, "config: probe_size must be >= 2");
    require(reverse_epochs > 0, "config: reverse_epochs must be positive");
    require(weight_floor > 0.0, "config: weight_floor must be positive");
  }

  bool operator==(const TrainConfig&) const = default;
};

namespace detail {

template <typename T>
T get_checked(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config: bad value for key '" + key + "'");
  }
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw std::invalid_argument("config: key '" + key + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace detail

inline void write_train_fields(nlohmann::json& j, const TrainConfig& c) {
  j["lambda"] = c.lambda;
  j["lr_phi"] = c.lr_phi;
  j["lr_w"] = c.lr_w;
  j["lr_gs"] = c.lr_gs;
  j["lr_gt"] = c.lr_gt;
  j["batch_size"] = c.batch_size;
  j["n_w"] = c.n_w;
  j["n_g"] = c.n_g;
  j["epochs"] = c.epochs;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["seed"] = c.seed;
  j["mode"] = mode_name(c.mode);
  j["phi_hidden"] = c.phi_hidden;
  j["phi_activation"] = activation_name(c.phi_activation);
  j["w_hidden_dims"] = c.w_hidden_dims;
  j["probe_size"] = c.probe_size;
  j["weight_loss_term"] = source_term_name(c.weight_loss_term);
  j["reverse_epochs"] = c.reverse_epochs;
  j["weight_floor"] = c.weight_floor;
}

// Assigns a TrainConfig field; returns false if the key is not one.
inline bool read_train_field(TrainConfig& c, const std::string& key, const nlohmann::json& v) {
  using detail::get_checked;
  using detail::get_count;
  if (key == "lambda") c.lambda = get_checked<double>(v, key);
  else if (key == "lr_phi") c.lr_phi = get_checked<double>(v, key);
  else if (key == "lr_w") c.lr_w = get_checked<double>(v, key);
  else if (key == "lr_gs") c.lr_gs = get_checked<double>(v, key);
  else if (key == "lr_gt") c.lr_gt = get_checked<double>(v, key);
  else if (key == "batch_size") c.batch_size = get_count(v, key);
  else if (key == "n_w") c.n_w = get_count(v, key);
  else if (key == "n_g") c.n_g = get_count(v, key);
  else if (key == "epochs") c.epochs = get_count(v, key);
  else if (key == "pretrain_epochs") c.pretrain_epochs = get_count(v, key);
  else if (key == "seed") c.seed = get_checked<std::uint64_t>(v, key);
  else if (key == "mode") c.mode = parse_mode(get_checked<std::string>(v, key));
  else if (key == "phi_hidden") c.phi_hidden = get_count(v, key);
  else if (key == "phi_activation") c.phi_activation = parse_activation(get_checked<std::string>(v, key));
  else if (key == "w_hidden_dims") c.w_hidden_dims = get_checked<std::vector<std::size_t>>(v, key);
  else if (key == "probe_size") c.probe_size = get_count(v, key);
  else if (key == "weight_loss_term") c.weight_loss_term = parse_source_term(get_checked<std::string>(v, key));
  else if (key == "reverse_epochs") c.reverse_epochs = get_count(v, key);
  else if (key == "weight_floor") c.weight_floor = get_checked<double>(v, key);
  else return false;
  return true;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  write_train_fields(j, c);
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), "config: expected a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (!read_train_field(c, key, value)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

// Synthetic two-feature data instead of input files.
struct ToyGeneratorSpec {
  std::size_t n_source = 2000;
  std::size_t n_target = 2000;
  double p_pos_target = 0.8;
  std::uint64_t seed = 0;

  bool operator==(const ToyGeneratorSpec&) const = default;
};

struct ExperimentConfig {
  TrainConfig train;
  std::string source_path;
  std::string target_path;
  FileFormat format = FileFormat::automatic;
  std::size_t vocab_size = 5000;
  std::optional<ToyGeneratorSpec> toy;
  ShiftSpec shift;
  std::size_t shift_n_source = 0;  // concept drift sizes; 0 = derived from inputs
  std::size_t shift_n_target = 0;
  std::string output_dir = "out";
  bool snapshots = true;
  std::vector<double> lambdas = {0.1, 1.0, 10.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
};

inline std::string_view format_name(FileFormat f) {
  switch (f) {
    case FileFormat::automatic: return "auto";
    case FileFormat::sparse: return "sparse";
    case FileFormat::acl: return "acl";
  }
  return "auto";
}

inline std::string_view shift_kind_name(ShiftSpec::Kind k) {
  switch (k) {
    case ShiftSpec::Kind::none: return "none";
    case ShiftSpec::Kind::concept_drift: return "concept_drift";
    case ShiftSpec::Kind::target_shift: return "target_shift";
  }
  return "none";
}

inline ShiftSpec::Kind parse_shift_kind(std::string_view s) {
  if (s == "none") return ShiftSpec::Kind::none;
  if (s == "concept_drift") return ShiftSpec::Kind::concept_drift;
  if (s == "target_shift") return ShiftSpec::Kind::target_shift;
  throw std::invalid_argument("unknown shift kind: " + std::string(s));
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  write_train_fields(j, c.train);
  j["source"] = c.source_path;
  j["target"] = c.target_path;
  j["format"] = format_name(c.format);
  j["vocab_size"] = c.vocab_size;
  if (c.toy) {
    j["toy"] = {{"n_source", c.toy->n_source},
                {"n_target", c.toy->n_target},
                {"p_pos_target", c.toy->p_pos_target},
                {"seed", c.toy->seed}};
  } else {
    j["toy"] = nullptr;
  }
  j["shift"] = {{"kind", shift_kind_name(c.shift.kind)},
                {"p_pos_given_d1", c.shift.p_pos_given_d1},
                {"p_pos_given_d2", c.shift.p_pos_given_d2},
                {"p_pos_target", c.shift.p_pos_target},
                {"n_source", c.shift_n_source},
                {"n_target", c.shift_n_target}};
  j["output_dir"] = c.output_dir;
  j["snapshots"] = c.snapshots;
  j["lambdas"] = c.lambdas;
  j["seeds"] = c.seeds;
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  using detail::get_checked;
  using detail::get_count;
  require(j.is_object(), "config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (read_train_field(c.train, key, v)) continue;
    if (key == "source") c.source_path = get_checked<std::string>(v, key);
    else if (key == "target") c.target_path = get_checked<std::string>(v, key);
    else if (key == "format") c.format = parse_file_format(get_checked<std::string>(v, key));
    else if (key == "vocab_size") c.vocab_size = get_count(v, key);
    else if (key == "output_dir") c.output_dir = get_checked<std::string>(v, key);
    else if (key == "snapshots") c.snapshots = get_checked<bool>(v, key);
    else if (key == "lambdas") c.lambdas = get_checked<std::vector<double>>(v, key);
    else if (key == "seeds") c.seeds = get_checked<std::vector<std::uint64_t>>(v, key);
    else if (key == "toy") {
      if (v.is_null()) {
        c.toy.reset();
        continue;
      }
      require(v.is_object(), "config: 'toy' must be an object or null");
      ToyGeneratorSpec t;
      for (const auto& [tk, tv] : v.items()) {
        if (tk == "n_source") t.n_source = get_count(tv, tk);
        else if (tk == "n_target") t.n_target = get_count(tv, tk);
        else if (tk == "p_pos_target") t.p_pos_target = get_checked<double>(tv, tk);
        else if (tk == "seed") t.seed = get_checked<std::uint64_t>(tv, tk);
        else throw std::invalid_argument("config: unknown key 'toy." + tk + "'");
      }
      c.toy = t;
    } else if (key == "shift") {
      require(v.is_object(), "config: 'shift' must be an object");
      for (const auto& [sk, sv] : v.items()) {
        if (sk == "kind") c.shift.kind = parse_shift_kind(get_checked<std::string>(sv, sk));
        else if (sk == "p_pos_given_d1") c.shift.p_pos_given_d1 = get_checked<double>(sv, sk);
        else if (sk == "p_pos_given_d2") c.shift.p_pos_given_d2 = get_checked<double>(sv, sk);
        else if (sk == "p_pos_target") c.shift.p_pos_target = get_checked<double>(sv, sk);
        else if (sk == "n_source") c.shift_n_source = get_count(sv, sk);
        else if (sk == "n_target") c.shift_n_target = get_count(sv, sk);
        else throw std::invalid_argument("config: unknown key 'shift." + sk + "'");
      }
      c.shift.validate();
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.train.validate();
  return c;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_json(a) == to_json(b);
}

}  // namespace hcs
