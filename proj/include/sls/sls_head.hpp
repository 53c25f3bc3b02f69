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

#ifndef SLS_SLS_HEAD_HPP
#define SLS_SLS_HEAD_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sls/error.hpp"
#include "sls/featstore.hpp"
#include "sls/rng.hpp"

namespace sls {

/// Numerically stable logistic function.
template <typename Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/**
   Learnable parameters of the layer-select head.

   The gate map (D -> 1, shared by every layer) turns each layer's
   frame-averaged feature vector into a layer weight; the output map
   (D -> 1) turns the frame-max of the weighted layer sum into a logit.
   Also used as the gradient container, since gradients share its shape.
*/
template <typename Scalar>
struct SlsParams {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector gate_weight;
  Scalar gate_bias{0};
  Vector out_weight;
  Scalar out_bias{0};

  static SlsParams zeros(Eigen::Index dim) {
    return SlsParams{Vector::Zero(dim), Scalar(0), Vector::Zero(dim),
                     Scalar(0)};
  }

  Eigen::Index dim() const noexcept { return gate_weight.size(); }

  /// Number of scalar parameters, 2D + 2.
  Eigen::Index size() const noexcept { return 2 * dim() + 2; }

  bool all_finite() const {
    using std::isfinite;
    return gate_weight.allFinite() && out_weight.allFinite() &&
           isfinite(gate_bias) && isfinite(out_bias);
  }

  SlsParams& operator+=(const SlsParams& other) {
    gate_weight += other.gate_weight;
    gate_bias += other.gate_bias;
    out_weight += other.out_weight;
    out_bias += other.out_bias;
    return *this;
  }

  SlsParams& operator*=(Scalar factor) {
    gate_weight *= factor;
    gate_bias *= factor;
    out_weight *= factor;
    out_bias *= factor;
    return *this;
  }

  /// Flat view order: gate_weight, gate_bias, out_weight, out_bias.
  Vector flatten() const {
    Vector flat(size());
    flat << gate_weight, gate_bias, out_weight, out_bias;
    return flat;
  }

  static SlsParams unflatten(const Vector& flat) {
    const Eigen::Index d = (flat.size() - 2) / 2;
    if (flat.size() != 2 * d + 2 || d < 1)
      throw std::invalid_argument("SlsParams::unflatten: bad length");
    return SlsParams{flat.head(d), flat(d), flat.segment(d + 1, d),
                     flat(2 * d + 1)};
  }

  template <typename Other>
  SlsParams<Other> cast() const {
    return SlsParams<Other>{gate_weight.template cast<Other>(),
                            static_cast<Other>(gate_bias),
                            out_weight.template cast<Other>(),
                            static_cast<Other>(out_bias)};
  }

  friend bool operator==(const SlsParams& a, const SlsParams& b) {
    return a.gate_weight == b.gate_weight && a.gate_bias == b.gate_bias &&
           a.out_weight == b.out_weight && a.out_bias == b.out_bias;
  }
};

/// Gate weights uniform in [-1/sqrt(D), 1/sqrt(D)); output weights and
/// both biases zero, so every trial starts at score 0 and the first update
/// moves the output map along the class-mean difference.
template <typename Scalar>
SlsParams<Scalar> init_params(Eigen::Index dim, Rng& rng) {
  using Vector = typename SlsParams<Scalar>::Vector;
  const double half = 1.0 / std::sqrt(static_cast<double>(dim));
  Vector gate(dim);
  for (Eigen::Index d = 0; d < dim; ++d)
    gate(d) = static_cast<Scalar>(rng.uniform(-half, half));
  return SlsParams<Scalar>{std::move(gate), Scalar(0), Vector::Zero(dim),
                           Scalar(0)};
}

/// Intermediate values of one forward pass, kept for the backward pass.
template <typename Scalar>
struct SlsForwardCache {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix layer_means;    // L x D, frame average of each layer
  Vector layer_weights;  // L, each in (0, 1)
  Matrix mixed;          // N x D, weighted layer sum
  Vector pooled;         // D, frame-max of `mixed`
  std::vector<Eigen::Index> argmax;  // D, lowest frame index on ties
  Vector out_weight;     // copy of the output map used for the score
  const HiddenStack* input = nullptr;
};

template <typename Scalar>
struct SlsForwardResult {
  Scalar score;
  SlsForwardCache<Scalar> cache;
};

namespace detail {

template <typename Scalar>
void check_dims(const HiddenStack& stack, const SlsParams<Scalar>& params) {
  if (params.gate_weight.size() != params.out_weight.size())
    throw DataError("head parameters inconsistent: gate D=" +
                    std::to_string(params.gate_weight.size()) + ", output D=" +
                    std::to_string(params.out_weight.size()));
  if (params.dim() != static_cast<Eigen::Index>(stack.dim()))
    throw DataError("dimension mismatch: stack '" + stack.utterance_id() +
                    "' has D=" + std::to_string(stack.dim()) +
                    ", head expects D=" + std::to_string(params.dim()));
}

template <typename Scalar>
typename SlsForwardCache<Scalar>::Matrix layer_means(const HiddenStack& stack) {
  typename SlsForwardCache<Scalar>::Matrix means(stack.layers(), stack.dim());
  for (std::uint32_t l = 0; l < stack.layers(); ++l)
    means.row(l) = stack.layer(l).template cast<Scalar>().colwise().mean();
  return means;
}

template <typename Scalar>
typename SlsForwardCache<Scalar>::Vector gate(
    const typename SlsForwardCache<Scalar>::Matrix& means,
    const SlsParams<Scalar>& params) {
  typename SlsForwardCache<Scalar>::Vector alpha =
      (means * params.gate_weight).array() + params.gate_bias;
  for (Eigen::Index l = 0; l < alpha.size(); ++l) alpha(l) = logistic(alpha(l));
  return alpha;
}

}  // namespace detail

/**
   Scores one stack. Layer weights are the logistic of the gate map applied
   to each layer's frame mean; the weighted layer sum is max-pooled over
   frames and passed through the output map. Larger means more bonafide.
*/
template <typename Scalar>
SlsForwardResult<Scalar> sls_forward(const HiddenStack& stack,
                                     const SlsParams<Scalar>& params) {
  detail::check_dims(stack, params);
  SlsForwardCache<Scalar> cache;
  cache.input = &stack;
  cache.layer_means = detail::layer_means<Scalar>(stack);
  cache.layer_weights = detail::gate(cache.layer_means, params);

  cache.mixed.setZero(stack.frames(), stack.dim());
  for (std::uint32_t l = 0; l < stack.layers(); ++l)
    cache.mixed.noalias() +=
        cache.layer_weights(l) * stack.layer(l).template cast<Scalar>();

  const Eigen::Index dim = stack.dim();
  cache.pooled.resize(dim);
  cache.argmax.resize(static_cast<std::size_t>(dim));
  for (Eigen::Index d = 0; d < dim; ++d) {
    Eigen::Index best = 0;
    for (Eigen::Index n = 1; n < cache.mixed.rows(); ++n)
      if (cache.mixed(n, d) > cache.mixed(best, d)) best = n;
    cache.argmax[static_cast<std::size_t>(d)] = best;
    cache.pooled(d) = cache.mixed(best, d);
  }
  cache.out_weight = params.out_weight;
  const Scalar score = params.out_weight.dot(cache.pooled) + params.out_bias;
  return {score, std::move(cache)};
}

/// Forward pass without keeping the cache.
template <typename Scalar>
Scalar sls_score(const HiddenStack& stack, const SlsParams<Scalar>& params) {
  return sls_forward(stack, params).score;
}

/**
   Reverse-mode gradient of the score with respect to every parameter,
   scaled by `upstream`. The max-pool routes its gradient to the cached
   argmax frame.
*/
template <typename Scalar>
SlsParams<Scalar> sls_backward(const SlsForwardCache<Scalar>& cache,
                               Scalar upstream) {
  const HiddenStack& stack = *cache.input;
  const Eigen::Index dim = cache.pooled.size();
  SlsParams<Scalar> grad;
  grad.out_bias = upstream;
  grad.out_weight = upstream * cache.pooled;

  const typename SlsForwardCache<Scalar>::Vector d_pooled =
      upstream * cache.out_weight;
  typename SlsForwardCache<Scalar>::Vector d_gate_input(stack.layers());
  for (std::uint32_t l = 0; l < stack.layers(); ++l) {
    const auto layer = stack.layer(l);
    Scalar d_alpha(0);
    for (Eigen::Index d = 0; d < dim; ++d)
      d_alpha += d_pooled(d) *
                 static_cast<Scalar>(layer(cache.argmax[static_cast<std::size_t>(d)], d));
    const Scalar a = cache.layer_weights(l);
    d_gate_input(l) = d_alpha * a * (Scalar(1) - a);
  }
  grad.gate_weight = cache.layer_means.transpose() * d_gate_input;
  grad.gate_bias = d_gate_input.sum();
  return grad;
}

/// The layer weights alone, identical to the forward pass's values.
template <typename Scalar>
typename SlsForwardCache<Scalar>::Vector layer_weights(
    const HiddenStack& stack, const SlsParams<Scalar>& params) {
  detail::check_dims(stack, params);
  return detail::gate(detail::layer_means<Scalar>(stack), params);
}

}  // namespace sls

#endif  // SLS_SLS_HEAD_HPP
