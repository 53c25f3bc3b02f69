// Copyright 2026 The slsdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference implementations used only by the tests. Nothing
// here calls into the library's computational code.

#ifndef SLS_TESTS_ORACLES_HPP
#define SLS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <vector>

#include "sls/featstore.hpp"

namespace sls::oracle {

struct PlainHead {
  std::vector<double> gate_weight;
  double gate_bias = 0.0;
  std::vector<double> out_weight;
  double out_bias = 0.0;
};

/// Straight loops over the raw payload: frame means, logistic gates,
/// weighted sum, frame max, linear readout.
inline double head_score(const HiddenStack& h, const PlainHead& p,
                         std::vector<double>* alpha_out = nullptr) {
  const std::size_t L = h.layers(), N = h.frames(), D = h.dim();
  const auto v = h.values();
  const auto at = [&](std::size_t l, std::size_t n, std::size_t d) {
    return static_cast<double>(v[(l * N + n) * D + d]);
  };
  std::vector<double> alpha(L);
  for (std::size_t l = 0; l < L; ++l) {
    double z = p.gate_bias;
    for (std::size_t d = 0; d < D; ++d) {
      double s = 0.0;
      for (std::size_t n = 0; n < N; ++n) s += at(l, n, d);
      z += p.gate_weight[d] * (s / static_cast<double>(N));
    }
    alpha[l] = 1.0 / (1.0 + std::exp(-z));
  }
  double score = p.out_bias;
  for (std::size_t d = 0; d < D; ++d) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < N; ++n) {
      double mixed = 0.0;
      for (std::size_t l = 0; l < L; ++l) mixed += alpha[l] * at(l, n, d);
      best = std::max(best, mixed);
    }
    score += p.out_weight[d] * best;
  }
  if (alpha_out) *alpha_out = alpha;
  return score;
}

/**
   Exhaustive EER: for every candidate threshold (each distinct score plus
   -inf and +inf) count accepted spoofs and rejected bonafides directly,
   then take the first threshold where FAR <= FRR and interpolate linearly
   with its predecessor when they differ.
*/
inline double brute_force_eer(const std::vector<double>& bona,
                              const std::vector<double>& spoof) {
  std::set<double> distinct(bona.begin(), bona.end());
  distinct.insert(spoof.begin(), spoof.end());
  std::vector<double> thresholds{-std::numeric_limits<double>::infinity()};
  thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const auto rates = [&](double t) {
    double accepted = 0.0, rejected = 0.0;
    for (double s : spoof)
      if (s >= t) accepted += 1.0;
    for (double b : bona)
      if (b < t) rejected += 1.0;
    return std::pair{accepted / static_cast<double>(spoof.size()),
                     rejected / static_cast<double>(bona.size())};
  };
  auto [far_prev, frr_prev] = rates(thresholds[0]);
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    const auto [far, frr] = rates(thresholds[i]);
    if (far == frr) return far;
    if (far < frr) {
      const double d0 = far_prev - frr_prev, d1 = far - frr;
      return far_prev + (d0 / (d0 - d1)) * (far - far_prev);
    }
    far_prev = far;
    frr_prev = frr;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Central difference of f along every coordinate of x.
inline std::vector<double> central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace sls::oracle

#endif  // SLS_TESTS_ORACLES_HPP
