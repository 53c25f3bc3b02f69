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

#ifndef SLS_ADAMW_HPP
#define SLS_ADAMW_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "sls/error.hpp"
#include "sls/sls_head.hpp"

namespace sls {

template <typename Scalar>
struct OptimizerState {
  static constexpr Scalar kBeta1 = Scalar(0.9);
  static constexpr Scalar kBeta2 = Scalar(0.999);
  static constexpr Scalar kEpsilon = Scalar(1e-8);

  SlsParams<Scalar> first_moment;
  SlsParams<Scalar> second_moment;
  std::uint64_t step = 0;

  static OptimizerState zeros(Eigen::Index dim) {
    return {SlsParams<Scalar>::zeros(dim), SlsParams<Scalar>::zeros(dim), 0};
  }
};

/**
   One AdamW update with bias correction and decoupled weight decay:
   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p, where the decay
   term uses the pre-update parameters. A non-finite gradient throws
   NumericError and leaves `params` and `state` untouched.
*/
template <typename Scalar>
void adamw_step(SlsParams<Scalar>& params, const SlsParams<Scalar>& grad,
                OptimizerState<Scalar>& state, Scalar lr, Scalar weight_decay) {
  using State = OptimizerState<Scalar>;
  using Vector = typename SlsParams<Scalar>::Vector;
  if (grad.dim() != params.dim() || state.first_moment.dim() != params.dim())
    throw DataError("adamw_step: shape mismatch");
  if (!grad.all_finite())
    throw NumericError("adamw_step: non-finite gradient at step " +
                       std::to_string(state.step + 1));

  const Vector g = grad.flatten();
  Vector p = params.flatten();
  Vector m = state.first_moment.flatten();
  Vector v = state.second_moment.flatten();

  const std::uint64_t t = state.step + 1;
  m = State::kBeta1 * m + (Scalar(1) - State::kBeta1) * g;
  v = State::kBeta2 * v + (Scalar(1) - State::kBeta2) * g.cwiseAbs2();
  using std::pow;
  const Scalar c1 = Scalar(1) - pow(State::kBeta1, static_cast<Scalar>(t));
  const Scalar c2 = Scalar(1) - pow(State::kBeta2, static_cast<Scalar>(t));
  const Vector step_dir =
      (m.array() / c1) / ((v.array() / c2).sqrt() + State::kEpsilon);
  p = p - lr * step_dir - lr * weight_decay * p;

  params = SlsParams<Scalar>::unflatten(p);
  state.first_moment = SlsParams<Scalar>::unflatten(m);
  state.second_moment = SlsParams<Scalar>::unflatten(v);
  state.step = t;
}

}  // namespace sls

#endif  // SLS_ADAMW_HPP
