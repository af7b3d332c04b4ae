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

#include "hcs/common.hpp"

#include <array>
#include <cmath>

namespace hcs {

enum class KernelKind { linear, gaussian, rational_quadratic };

class KernelSpec {
 public:
  static KernelSpec linear() { return KernelSpec(KernelKind::linear, 1.0); }
  static KernelSpec gaussian(double sigma) {
    return KernelSpec(KernelKind::gaussian, sigma);
  }
  static KernelSpec rational_quadratic(double alpha) {
    return KernelSpec(KernelKind::rational_quadratic, alpha);
  }

  KernelKind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }

 private:
  KernelSpec(KernelKind kind, double bandwidth) : kind_(kind), bandwidth_(bandwidth) {
    if (kind != KernelKind::linear && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
      throw std::invalid_argument("kernel bandwidth must be positive and finite");
    }
  }

  KernelKind kind_;
  double bandwidth_;
};

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    d2 += d * d;
  }
  return d2;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                          std::span<const double> y) {
  require(x.size() == y.size(), "eval_kernel: dimension mismatch");
  switch (spec.kind()) {
    case KernelKind::linear:
      return dot(x, y);
    case KernelKind::gaussian: {
      const double s = spec.bandwidth();
      return std::exp(-squared_distance(x, y) / (2.0 * s * s));
    }
    case KernelKind::rational_quadratic: {
      const double a = spec.bandwidth();
      return std::pow(1.0 + squared_distance(x, y) / (2.0 * a), -a);
    }
  }
  return 0.0;
}

// Kernel value at a pair together with the data needed for its gradient:
//   d k(x, y) / dx = linear_count * y + radial * (x - y).
struct KernelEval {
  double value = 0.0;
  double radial = 0.0;
};

// Gram matrices of a bank over two point sets. `radial` is only filled when
// gradients were requested.
struct GramBlock {
  Eigen::MatrixXd value;
  Eigen::MatrixXd radial;
  int linear_count = 0;
};

// Fixed family of kernels; evaluation is the unweighted sum of members.
class KernelBank {
 public:
  KernelBank() = default;
  explicit KernelBank(std::vector<KernelSpec> specs) : specs_(std::move(specs)) {
    for (const auto& s : specs_) {
      if (s.kind() == KernelKind::linear) ++linear_count_;
    }
  }

  static constexpr std::array<double, 11> kBandwidthGrid = {
      0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 200.0};

  // 1 linear, 11 gaussian and 11 rational-quadratic kernels.
  static KernelBank default_bank() {
    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::linear());
    for (double s : kBandwidthGrid) specs.push_back(KernelSpec::gaussian(s));
    for (double a : kBandwidthGrid) specs.push_back(KernelSpec::rational_quadratic(a));
    return KernelBank(std::move(specs));
  }

  const std::vector<KernelSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  bool empty() const { return specs_.empty(); }
  int linear_count() const { return linear_count_; }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    require(x.size() == y.size(), "kernel bank: dimension mismatch");
    return eval_pair(x, y).value;
  }

  // Unchecked pair evaluation; members are summed in declaration order.
  KernelEval eval_pair(std::span<const double> x, std::span<const double> y) const {
    KernelEval out;
    double d2 = -1.0;
    for (const auto& spec : specs_) {
      switch (spec.kind()) {
        case KernelKind::linear:
          out.value += dot(x, y);
          break;
        case KernelKind::gaussian: {
          if (d2 < 0.0) d2 = squared_distance(x, y);
          const double inv = 1.0 / (spec.bandwidth() * spec.bandwidth());
          const double k = std::exp(-0.5 * d2 * inv);
          out.value += k;
          out.radial -= k * inv;
          break;
        }
        case KernelKind::rational_quadratic: {
          if (d2 < 0.0) d2 = squared_distance(x, y);
          const double a = spec.bandwidth();
          const double base = 1.0 + d2 / (2.0 * a);
          const double k = std::pow(base, -a);
          out.value += k;
          out.radial -= k / base;
          break;
        }
      }
    }
    return out;
  }

 private:
  std::vector<KernelSpec> specs_;
  int linear_count_ = 0;
};

// Column j of the block is computed as one vector over all rows of `a`, so an
// entry's value does not depend on how columns are split across threads.
inline GramBlock gram_block(const KernelBank& bank, const Points& a, const Points& b,
                            bool with_radial) {
  require(a.rows() > 0 && b.rows() > 0, "gram: empty point set");
  require(a.cols() == b.cols(), "gram: dimension mismatch");
  GramBlock block;
  block.linear_count = bank.linear_count();
  block.value.resize(a.rows(), b.rows());
  if (with_radial) block.radial.resize(a.rows(), b.rows());
  const Eigen::MatrixXd ac = a;  // column-major copy for contiguous feature columns
  const Eigen::Index na = a.rows();
  detail::parallel_rows(
      static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(na) * bank.size(),
      [&](std::size_t begin, std::size_t end) {
        Eigen::ArrayXd d2(na);
        Eigen::ArrayXd dots(na);
        Eigen::ArrayXd value(na);
        Eigen::ArrayXd radial(na);
        Eigen::ArrayXd k(na);
        Eigen::ArrayXd base(na);
        for (std::size_t jj = begin; jj < end; ++jj) {
          const auto j = static_cast<Eigen::Index>(jj);
          d2.setZero();
          dots.setZero();
          for (Eigen::Index c = 0; c < ac.cols(); ++c) {
            const double y = b(j, c);
            d2 += (ac.col(c).array() - y).square();
            dots += ac.col(c).array() * y;
          }
          value.setZero();
          radial.setZero();
          for (const auto& spec : bank.specs()) {
            switch (spec.kind()) {
              case KernelKind::linear:
                value += dots;
                break;
              case KernelKind::gaussian: {
                const double inv = 1.0 / (spec.bandwidth() * spec.bandwidth());
                k = (d2 * (-0.5 * inv)).exp();
                value += k;
                if (with_radial) radial -= k * inv;
                break;
              }
              case KernelKind::rational_quadratic: {
                const double alpha = spec.bandwidth();
                base = 1.0 + d2 / (2.0 * alpha);
                k = (base.log() * -alpha).exp();
                value += k;
                if (with_radial) radial -= k / base;
                break;
              }
            }
          }
          block.value.col(j) = value.matrix();
          if (with_radial) block.radial.col(j) = radial.matrix();
        }
      });
  return block;
}

inline Eigen::MatrixXd gram(const KernelBank& bank, const Points& a, const Points& b) {
  return gram_block(bank, a, b, false).value;
}

// (h, y) -> (y h, (1 - y) h)
inline Vector joint_embed(std::span<const double> h, int y) {
  require(y == 0 || y == 1, "joint_embed: label must be 0 or 1");
  const auto d = static_cast<Eigen::Index>(h.size());
  Vector out = Vector::Zero(2 * d);
  const Eigen::Index offset = y == 1 ? 0 : d;
  for (Eigen::Index k = 0; k < d; ++k) out(offset + k) = h[static_cast<std::size_t>(k)];
  return out;
}

inline Points joint_embed(const Points& h, std::span<const int> y) {
  require(static_cast<std::size_t>(h.rows()) == y.size(), "joint_embed: label count mismatch");
  const Eigen::Index d = h.cols();
  Points out = Points::Zero(h.rows(), 2 * d);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    require(label == 0 || label == 1, "joint_embed: label must be 0 or 1");
    out.block(i, label == 1 ? 0 : d, 1, d) = h.row(i);
  }
  return out;
}

// Pulls a gradient on joint embeddings back onto the representation.
inline Points joint_embed_backward(const Points& grad_embedded, std::span<const int> y) {
  const Eigen::Index d = grad_embedded.cols() / 2;
  Points out(grad_embedded.rows(), d);
  for (Eigen::Index i = 0; i < grad_embedded.rows(); ++i) {
    out.row(i) = grad_embedded.block(i, y[static_cast<std::size_t>(i)] == 1 ? 0 : d, 1, d);
  }
  return out;
}

}  // namespace hcs
