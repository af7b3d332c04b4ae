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

// Small dense feed-forward networks with hand-written backpropagation,
// the binary cross-entropy used by the classifier heads, the positive
// normalized weight model, and RMSProp.

#include "hcs/common.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <string_view>

#include <json.hpp>

namespace hcs {

enum class Activation { identity, tanh, sigmoid, softplus };

inline std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softplus: return "softplus";
  }
  return "identity";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softplus") return Activation::softplus;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Vector bias;             // out
  Activation activation = Activation::identity;
};

// Activations of every layer, input first. Needed by backward().
struct ForwardCache {
  std::vector<Points> activations;
};

struct MlpGradient {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Vector> bias;
};

class Mlp {
 public:
  Mlp() = default;

  // Glorot-uniform weights, zero biases. `activations` has one entry per layer.
  Mlp(const std::vector<std::size_t>& layer_dims, const std::vector<Activation>& activations,
      std::mt19937_64& rng) {
    require(layer_dims.size() >= 2, "Mlp: need at least input and output dims");
    require(activations.size() == layer_dims.size() - 1, "Mlp: one activation per layer");
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
      const std::size_t in = layer_dims[l];
      const std::size_t out = layer_dims[l + 1];
      require(in > 0 && out > 0, "Mlp: layer dims must be positive");
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      DenseLayer layer;
      layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
      }
      layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
      layer.activation = activations[l];
      layers_.push_back(std::move(layer));
    }
  }

  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), "Mlp: no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      require(layers_[l].bias.size() == layers_[l].weight.rows(), "Mlp: bias shape mismatch");
      if (l > 0) {
        require(layers_[l].weight.cols() == layers_[l - 1].weight.rows(),
                "Mlp: consecutive layer shapes disagree");
      }
    }
  }

  bool empty() const { return layers_.empty(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  Eigen::Index input_dim() const { return layers_.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers_.back().weight.rows(); }

  std::vector<std::size_t> layer_dims() const {
    std::vector<std::size_t> dims{static_cast<std::size_t>(input_dim())};
    for (const auto& l : layers_) dims.push_back(static_cast<std::size_t>(l.weight.rows()));
    return dims;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  Points forward(const Points& x) const {
    check_input(x);
    Points a = x;
    for (const auto& layer : layers_) a = apply_layer(layer, a);
    return a;
  }

  Points forward(const Points& x, ForwardCache& cache) const {
    check_input(x);
    cache.activations.clear();
    cache.activations.reserve(layers_.size() + 1);
    cache.activations.push_back(x);
    for (const auto& layer : layers_) {
      cache.activations.push_back(apply_layer(layer, cache.activations.back()));
    }
    return cache.activations.back();
  }

  // Back-propagates dL/d(output). Writes dL/d(input) when grad_input is given.
  MlpGradient backward(const ForwardCache& cache, const Points& grad_output,
                       Points* grad_input = nullptr) const {
    require(cache.activations.size() == layers_.size() + 1, "Mlp::backward: stale cache");
    MlpGradient g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Points delta = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& layer = layers_[l];
      apply_activation_derivative(layer.activation, cache.activations[l + 1], delta);
      const Points& input = cache.activations[l];
      g.weight[l] = delta.transpose() * input;
      g.bias[l] = delta.colwise().sum().transpose();
      if (l > 0 || grad_input != nullptr) {
        Points next = delta * layer.weight;
        delta = std::move(next);
      }
    }
    if (grad_input != nullptr) *grad_input = std::move(delta);
    return g;
  }

  std::vector<double> flat_parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers_) {
      out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
      out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return out;
  }

  void set_flat_parameters(std::span<const double> p) {
    require(p.size() == parameter_count(), "Mlp: parameter count mismatch");
    std::size_t k = 0;
    for (auto& l : layers_) {
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(k), l.weight.size(), l.weight.data());
      k += static_cast<std::size_t>(l.weight.size());
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(k), l.bias.size(), l.bias.data());
      k += static_cast<std::size_t>(l.bias.size());
    }
  }

  std::uint64_t parameter_hash() const {
    const auto p = flat_parameters();
    return hash_doubles(p);
  }

 private:
  void check_input(const Points& x) const {
    require(!layers_.empty(), "Mlp: empty network");
    require(x.cols() == input_dim(), "Mlp: input dimension mismatch");
  }

  static Points apply_layer(const DenseLayer& layer, const Points& x) {
    Points z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    switch (layer.activation) {
      case Activation::identity: break;
      case Activation::tanh: z = z.array().tanh(); break;
      case Activation::sigmoid: z = z.unaryExpr([](double v) { return sigmoid(v); }); break;
      case Activation::softplus: z = z.unaryExpr([](double v) { return softplus(v); }); break;
    }
    return z;
  }

  // delta <- delta * act'(z), with act' expressed through the output a = act(z).
  static void apply_activation_derivative(Activation act, const Points& a, Points& delta) {
    switch (act) {
      case Activation::identity: break;
      case Activation::tanh: delta.array() *= 1.0 - a.array().square(); break;
      case Activation::sigmoid: delta.array() *= a.array() * (1.0 - a.array()); break;
      case Activation::softplus:
        delta.array() *= 1.0 - (-a.array()).exp();
        break;
    }
  }

  std::vector<DenseLayer> layers_;
};

inline std::vector<double> flatten(const MlpGradient& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    out.insert(out.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
    out.insert(out.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kPredictionClip = 1e-7;

struct LossValue {
  double value = 0.0;
  Vector grad;  // d value / d pred
};

// mean_i w_i * (-y_i log p_i - (1 - y_i) log(1 - p_i)), p clipped to
// [kPredictionClip, 1 - kPredictionClip]. The clipped region has zero gradient.
inline LossValue weighted_cross_entropy(std::span<const double> pred, std::span<const int> y,
                                        std::span<const double> w) {
  require(pred.size() == y.size() && pred.size() == w.size(),
          "weighted_cross_entropy: length mismatch");
  require(!pred.empty(), "weighted_cross_entropy: empty batch");
  const auto n = static_cast<double>(pred.size());
  LossValue out;
  out.grad = Vector::Zero(static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double raw = pred[i];
    const double p = std::clamp(raw, kPredictionClip, 1.0 - kPredictionClip);
    const bool clipped = p != raw;
    if (y[i] == 1) {
      out.value -= w[i] * std::log(p);
      if (!clipped) out.grad(static_cast<Eigen::Index>(i)) = -w[i] / (p * n);
    } else {
      out.value -= w[i] * std::log1p(-p);
      if (!clipped) out.grad(static_cast<Eigen::Index>(i)) = w[i] / ((1.0 - p) * n);
    }
  }
  out.value /= n;
  return out;
}

inline Labels harden(std::span<const double> prob) {
  Labels out(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) out[i] = prob[i] >= 0.5 ? 1 : 0;
  return out;
}

inline std::span<const double> column_span(const Points& single_column) {
  return {single_column.data(), static_cast<std::size_t>(single_column.size())};
}

// ---------------------------------------------------------------------------
// Weight model: strictly positive outputs rescaled to unit batch mean.

// Mean computed as min + mean(x - min) so that a constant batch normalizes to
// exactly one.
inline double stable_mean(std::span<const double> x) {
  const double lo = *std::min_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += v - lo;
  return lo + s / static_cast<double>(x.size());
}

struct WeightPass {
  ForwardCache cache;
  Vector positive;  // softplus outputs
  Vector weights;   // positive / mean(positive)
  double mean = 1.0;
};

// Builds a weight network: softplus on its last layer gives strict positivity.
inline Mlp make_weight_net(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                           std::mt19937_64& rng) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  std::vector<Activation> acts(dims.size() - 1, Activation::tanh);
  acts.back() = Activation::softplus;
  return Mlp(dims, acts, rng);
}

inline WeightPass weight_model_forward(const Mlp& wnet, const Points& h) {
  require(h.rows() > 0, "weight_model_apply: empty batch");
  require(wnet.output_dim() == 1, "weight_model_apply: weight network must have one output");
  WeightPass pass;
  const Points out = wnet.forward(h, pass.cache);
  pass.positive = Eigen::Map<const Vector>(out.data(), out.size());
  // Guard against softplus underflow to exactly zero.
  pass.positive = pass.positive.cwiseMax(std::numeric_limits<double>::min());
  pass.mean = stable_mean({pass.positive.data(), static_cast<std::size_t>(pass.positive.size())});
  pass.weights = pass.positive / pass.mean;
  return pass;
}

inline Vector weight_model_apply(const Mlp& wnet, const Points& h) {
  return weight_model_forward(wnet, h).weights;
}

// Weights of `h` normalized by the mean positive output of a reference batch
// (the source), so that target rows are on the source-normalized scale.
inline Vector weight_model_apply_relative(const Mlp& wnet, const Points& h, double reference_mean) {
  const Points out = wnet.forward(h);
  Vector w = Eigen::Map<const Vector>(out.data(), out.size());
  return w.cwiseMax(std::numeric_limits<double>::min()) / reference_mean;
}

inline MlpGradient weight_model_backward(const Mlp& wnet, const WeightPass& pass,
                                         const Vector& grad_weights) {
  const double correction = grad_weights.dot(pass.weights) / static_cast<double>(grad_weights.size());
  Points grad_out(grad_weights.size(), 1);
  for (Eigen::Index i = 0; i < grad_weights.size(); ++i) {
    grad_out(i, 0) = (grad_weights(i) - correction) / pass.mean;
  }
  return wnet.backward(pass.cache, grad_out);
}

// ---------------------------------------------------------------------------
// RMSProp

struct RmsPropState {
  double learning_rate = 0.001;
  double decay = 0.9;
  double epsilon = 1e-8;
  std::vector<double> accumulator;  // lazily sized on first step
};

inline void rmsprop_step(std::span<double> params, std::span<const double> grads,
                         RmsPropState& state) {
  require(params.size() == grads.size(), "rmsprop_step: gradient shape mismatch");
  if (state.accumulator.empty()) state.accumulator.assign(params.size(), 0.0);
  require(state.accumulator.size() == params.size(), "rmsprop_step: state shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& acc = state.accumulator[i];
    acc = state.decay * acc + (1.0 - state.decay) * grads[i] * grads[i];
    params[i] -= state.learning_rate * grads[i] / std::sqrt(acc + state.epsilon);
  }
}

inline void rmsprop_step(Mlp& net, const MlpGradient& grads, RmsPropState& state) {
  require(grads.weight.size() == net.layers().size(), "rmsprop_step: layer count mismatch");
  std::vector<double> p = net.flat_parameters();
  const std::vector<double> g = flatten(grads);
  rmsprop_step(p, g, state);
  for (double v : p) {
    if (!std::isfinite(v)) throw NumericalError("non-finite parameter after RMSProp step");
  }
  net.set_flat_parameters(p);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

// loss(params, grad) returns the loss and, when grad != nullptr, writes the
// analytic gradient. Returns the worst relative error over all coordinates,
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
using LossClosure = std::function<double(std::span<const double>, std::vector<double>*)>;

inline double grad_check(const LossClosure& loss, std::vector<double> params, double h = 1e-5,
                         double floor = 1e-6) {
  std::vector<double> analytic;
  loss(params, &analytic);
  require(analytic.size() == params.size(), "grad_check: gradient size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss(params, nullptr);
    params[i] = saved - h;
    const double down = loss(params, nullptr);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints.
//
// Binary record (little-endian):
//   "HCSM" | u32 version | u32 layer count | per layer:
//   u32 in | u32 out | u32 activation | out*in weights (row-major) | out biases
// JSON record: {"version", "layers": [{"in", "out", "activation", "weight", "bias"}]}

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("checkpoint: unexpected end of stream");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline void save_binary(std::ostream& os, const Mlp& net) {
  os.write("HCSM", 4);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.cols()));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.rows()));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.activation));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) detail::write_le<double>(os, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) detail::write_le<double>(os, l.bias(r));
  }
}

inline Mlp load_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != "HCSM") {
    throw DataError("checkpoint: bad magic");
  }
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version");
  const auto count = detail::read_le<std::uint32_t>(is);
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    const auto in = detail::read_le<std::uint32_t>(is);
    const auto out = detail::read_le<std::uint32_t>(is);
    const auto act = detail::read_le<std::uint32_t>(is);
    if (act > static_cast<std::uint32_t>(Activation::softplus)) {
      throw DataError("checkpoint: bad activation code");
    }
    l.activation = static_cast<Activation>(act);
    l.weight.resize(out, in);
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = detail::read_le<double>(is);
    }
    l.bias.resize(out);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = detail::read_le<double>(is);
  }
  return Mlp(std::move(layers));
}

inline nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    layers.push_back({{"in", l.weight.cols()},
                      {"out", l.weight.rows()},
                      {"activation", activation_name(l.activation)},
                      {"weight", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"version", kCheckpointVersion}, {"layers", layers}};
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::uint32_t>() != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported version");
    }
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      const auto in = jl.at("in").get<Eigen::Index>();
      const auto out = jl.at("out").get<Eigen::Index>();
      l.activation = parse_activation(jl.at("activation").get<std::string>());
      const auto w = jl.at("weight").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != in * out ||
          static_cast<Eigen::Index>(b.size()) != out) {
        throw DataError("checkpoint: parameter array has wrong length");
      }
      l.weight.resize(out, in);
      for (Eigen::Index r = 0; r < out; ++r) {
        for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * in + c)];
      }
      l.bias = Eigen::Map<const Vector>(b.data(), out);
      layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace hcs
