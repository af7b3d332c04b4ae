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

// Comparison invariances sharing the same kernels and estimators:
// marginal matching of the representation (all weights one) and
// class-conditional matching with label-only weights w(y) = P_t(y) / P_s(y).

#include "hcs/mmd.hpp"

namespace hcs {

struct ClassRatio {
  double w0 = 1.0;
  double w1 = 1.0;

  double operator()(int y) const { return y == 1 ? w1 : w0; }

  std::vector<double> weights_for(std::span<const int> y) const {
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = (*this)(y[i]);
    return w;
  }
};

inline MmdValue marginal_invariance_loss(const KernelBank& bank, const Points& hs,
                                         const Points& ht, MmdGradRequest req = {}) {
  return mmd_unbiased_sq(bank, hs, ht, req);
}

// P_t(Y=y) comes from hardened target predictions; `smoothing` adds that many
// pseudo-counts to each predicted class.
inline ClassRatio estimate_class_ratio(std::span<const int> target_predictions,
                                       double source_positive_rate, double smoothing = 0.0) {
  require(!target_predictions.empty(), "estimate_class_ratio: no target predictions");
  require(smoothing >= 0.0, "estimate_class_ratio: smoothing must be non-negative");
  if (!(source_positive_rate > 0.0 && source_positive_rate < 1.0)) {
    throw std::invalid_argument(
        "estimate_class_ratio: both source classes need non-zero frequency");
  }
  const auto positives =
      static_cast<double>(std::count(target_predictions.begin(), target_predictions.end(), 1));
  const auto total = static_cast<double>(target_predictions.size());
  const double pt1 = (positives + smoothing) / (total + 2.0 * smoothing);
  return {(1.0 - pt1) / (1.0 - source_positive_rate), pt1 / source_positive_rate};
}

inline MmdValue class_conditional_loss(const KernelBank& bank, const Points& hs,
                                       std::span<const int> ys, const ClassRatio& ratio,
                                       const Points& ht, std::span<const int> yt_hat,
                                       MmdGradRequest req = {}) {
  const auto w = ratio.weights_for(ys);
  req.weights = false;
  return joint_weighted_mmd_sq(bank, hs, ys, w, ht, yt_hat, req);
}

}  // namespace hcs
