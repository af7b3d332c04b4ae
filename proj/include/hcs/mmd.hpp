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

// Unbiased squared-MMD estimators over a KernelBank:
//
//   plain      (1/n(n-1)) sum_{i!=j} k(a_i,a_j) + (1/m(m-1)) sum_{i!=j} k(b_i,b_j)
//              - (2/nm) sum_{i,j} k(a_i,b_j)
//   weighted   source rows carry weights w_i: w_i w_j in the source-source term
//              and w_i in the cross term.
//   joint      weighted, evaluated on joint_embed(h, y).
//
// Values are squared estimates and may be negative.

#include "hcs/kernels.hpp"

#include <optional>

namespace hcs {

struct MmdGradRequest {
  bool source = false;
  bool target = false;
  bool weights = false;

  static MmdGradRequest all() { return {true, true, true}; }
  bool any() const { return source || target || weights; }
};

struct MmdValue {
  double value = 0.0;
  std::optional<Points> grad_source;
  std::optional<Points> grad_target;
  std::optional<Vector> grad_weights;
};

namespace detail {

inline double off_diagonal_sum(const Eigen::MatrixXd& k) { return k.sum() - k.trace(); }

// Value of the weighted estimator from precomputed Gram matrices, and
// optionally its gradient with respect to the source weights.
inline double weighted_value(const Eigen::MatrixXd& kss, double tt_term,
                             const Eigen::MatrixXd& kst, std::span<const double> w,
                             Vector* grad_w, bool with_diagonal = false) {
  const auto n = static_cast<double>(kss.rows());
  const auto m = static_cast<double>(kst.cols());
  const double css = with_diagonal ? 1.0 / (n * n) : 1.0 / (n * (n - 1.0));
  const double cst = 2.0 / (n * m);
  const Eigen::Map<const Vector> wv(w.data(), kss.rows());
  const Vector kw = kss * wv;
  const Vector st_rows = kst.rowwise().sum();
  const Vector diag_w = kss.diagonal().cwiseProduct(wv);
  double ss = wv.dot(kw);
  if (!with_diagonal) ss -= wv.dot(diag_w);
  if (grad_w != nullptr) {
    Vector sym = kw + kss.transpose() * wv;
    if (!with_diagonal) sym -= 2.0 * diag_w;
    *grad_w = css * sym - cst * st_rows;
  }
  return css * ss + tt_term - cst * wv.dot(st_rows);
}

// Adds the gradient of sum_ij coeff(i,j) k(x_i, y_j) with respect to x and y.
inline void accumulate_block_gradient(const GramBlock& block, const Eigen::MatrixXd& coeff,
                                      const Points& x, const Points& y, Points* gx, Points* gy) {
  const Eigen::MatrixXd ac = coeff.cwiseProduct(block.radial);
  const double lin = block.linear_count;
  if (gx != nullptr) {
    Points g = (ac * y) * -1.0;
    g += ac.rowwise().sum().asDiagonal() * x;
    if (lin != 0.0) g += lin * (coeff * y);
    *gx += g;
  }
  if (gy != nullptr) {
    Points g = (ac.transpose() * x) * -1.0;
    g += ac.colwise().sum().transpose().asDiagonal() * y;
    if (lin != 0.0) g += lin * (coeff.transpose() * x);
    *gy += g;
  }
}

inline void check_sizes(const Points& s, const Points& t) {
  require(s.rows() >= 2, "mmd: source needs at least 2 samples");
  require(t.rows() >= 2, "mmd: target needs at least 2 samples");
  require(s.cols() == t.cols(), "mmd: dimension mismatch");
}

inline void check_weights(std::span<const double> w, Eigen::Index n) {
  require(static_cast<Eigen::Index>(w.size()) == n, "mmd: weight count mismatch");
  for (double v : w) {
    require(v >= 0.0, "mmd: weights must be non-negative");
  }
}

inline MmdValue weighted_estimate(const KernelBank& bank, const Points& s,
                                  std::span<const double> w, const Points& t,
                                  MmdGradRequest req) {
  const bool embed_grad = req.source || req.target;
  const GramBlock ss = gram_block(bank, s, s, embed_grad);
  const GramBlock tt = gram_block(bank, t, t, embed_grad);
  const GramBlock st = gram_block(bank, s, t, embed_grad);
  const auto n = static_cast<double>(s.rows());
  const auto m = static_cast<double>(t.rows());
  const double tt_term = off_diagonal_sum(tt.value) / (m * (m - 1.0));

  MmdValue out;
  Vector gw;
  out.value = weighted_value(ss.value, tt_term, st.value, w, req.weights ? &gw : nullptr);
  if (req.weights) out.grad_weights = std::move(gw);
  if (!embed_grad) return out;

  const Eigen::Map<const Vector> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::MatrixXd css = (wv * wv.transpose()) / (n * (n - 1.0));
  css.diagonal().setZero();
  Eigen::MatrixXd ctt = Eigen::MatrixXd::Constant(t.rows(), t.rows(), 1.0 / (m * (m - 1.0)));
  ctt.diagonal().setZero();
  const Eigen::MatrixXd cst = wv.replicate(1, t.rows()) * (-2.0 / (n * m));

  Points gs = Points::Zero(s.rows(), s.cols());
  Points gt = Points::Zero(t.rows(), t.cols());
  if (req.source) {
    // The source-source block is symmetric in its two arguments.
    accumulate_block_gradient(ss, css, s, s, &gs, &gs);
  }
  if (req.target) accumulate_block_gradient(tt, ctt, t, t, &gt, &gt);
  accumulate_block_gradient(st, cst, s, t, req.source ? &gs : nullptr,
                            req.target ? &gt : nullptr);
  if (req.source) out.grad_source = std::move(gs);
  if (req.target) out.grad_target = std::move(gt);
  return out;
}

}  // namespace detail

inline MmdValue mmd_unbiased_sq(const KernelBank& bank, const Points& a, const Points& b,
                                MmdGradRequest req = {}) {
  detail::check_sizes(a, b);
  const std::vector<double> ones(static_cast<std::size_t>(a.rows()), 1.0);
  req.weights = false;
  return detail::weighted_estimate(bank, a, ones, b, req);
}

inline MmdValue weighted_mmd_sq(const KernelBank& bank, const Points& hs,
                                std::span<const double> w, const Points& ht,
                                MmdGradRequest req = {}) {
  detail::check_sizes(hs, ht);
  detail::check_weights(w, hs.rows());
  return detail::weighted_estimate(bank, hs, w, ht, req);
}

inline MmdValue joint_weighted_mmd_sq(const KernelBank& bank, const Points& hs,
                                      std::span<const int> ys, std::span<const double> w,
                                      const Points& ht, std::span<const int> yt,
                                      MmdGradRequest req = {}) {
  detail::check_sizes(hs, ht);
  detail::check_weights(w, hs.rows());
  const Points es = joint_embed(hs, ys);
  const Points et = joint_embed(ht, yt);
  MmdValue out = detail::weighted_estimate(bank, es, w, et, req);
  if (out.grad_source) out.grad_source = joint_embed_backward(*out.grad_source, ys);
  if (out.grad_target) out.grad_target = joint_embed_backward(*out.grad_target, yt);
  return out;
}

// Empirical witness: mean_i k(x, a_i) - mean_j k(x, b_j).
inline double witness(const KernelBank& bank, const Points& a, const Points& b,
                      std::span<const double> x) {
  require(a.rows() > 0 && b.rows() > 0, "witness: empty point set");
  require(a.cols() == b.cols() && static_cast<Eigen::Index>(x.size()) == a.cols(),
          "witness: dimension mismatch");
  double sa = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) sa += bank.eval_pair(x, row_span(a, i)).value;
  double sb = 0.0;
  for (Eigen::Index j = 0; j < b.rows(); ++j) sb += bank.eval_pair(x, row_span(b, j)).value;
  return sa / static_cast<double>(a.rows()) - sb / static_cast<double>(b.rows());
}

// How the weighted source-source sum is formed by WeightedMmdGram:
// `unbiased` is the printed i != j form; `v_statistic` includes i == j and
// divides by n^2, which penalizes concentrating the weight on a few rows.
enum class SourceTerm { unbiased, v_statistic };

// Caches the Gram matrices of a fixed (source, target) pair so the weighted
// estimator can be re-evaluated cheaply for many weight vectors.
class WeightedMmdGram {
 public:
  WeightedMmdGram(const KernelBank& bank, const Points& hs, const Points& ht) {
    detail::check_sizes(hs, ht);
    kss_ = gram(bank, hs, hs);
    kst_ = gram(bank, hs, ht);
    const auto m = static_cast<double>(ht.rows());
    tt_term_ = detail::off_diagonal_sum(gram(bank, ht, ht)) / (m * (m - 1.0));
  }

  MmdValue evaluate(std::span<const double> w, bool grad_weights,
                    SourceTerm term = SourceTerm::unbiased) const {
    detail::check_weights(w, kss_.rows());
    MmdValue out;
    Vector g;
    out.value = detail::weighted_value(kss_, tt_term_, kst_, w, grad_weights ? &g : nullptr,
                                       term == SourceTerm::v_statistic);
    if (grad_weights) out.grad_weights = std::move(g);
    return out;
  }

 private:
  Eigen::MatrixXd kss_;
  Eigen::MatrixXd kst_;
  double tt_term_ = 0.0;
};

}  // namespace hcs
