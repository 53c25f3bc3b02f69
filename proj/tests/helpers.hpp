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

#ifndef SLS_TESTS_HELPERS_HPP
#define SLS_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sls/featstore.hpp"
#include "sls/rng.hpp"
#include "sls/sls_head.hpp"

namespace sls::test {

/// Stack with entries uniform in [-1, 1), drawn in payload order.
inline HiddenStack random_stack(std::uint32_t layers, std::uint32_t frames,
                                std::uint32_t dim, Rng& rng,
                                std::string id = "utt") {
  std::vector<float> values(std::size_t{layers} * frames * dim);
  for (auto& v : values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return HiddenStack(std::move(id), layers, frames, dim, std::move(values));
}

/// gate_weight, gate_bias, out_weight, out_bias uniform in [-1, 1), in
/// that draw order.
inline SlsParams<double> random_params(std::uint32_t dim, Rng& rng) {
  auto p = SlsParams<double>::zeros(dim);
  for (std::uint32_t d = 0; d < dim; ++d) p.gate_weight(d) = rng.uniform(-1.0, 1.0);
  p.gate_bias = rng.uniform(-1.0, 1.0);
  for (std::uint32_t d = 0; d < dim; ++d) p.out_weight(d) = rng.uniform(-1.0, 1.0);
  p.out_bias = rng.uniform(-1.0, 1.0);
  return p;
}

inline oracle::PlainHead plain(const SlsParams<double>& p) {
  oracle::PlainHead h;
  h.gate_weight.assign(p.gate_weight.data(), p.gate_weight.data() + p.dim());
  h.gate_bias = p.gate_bias;
  h.out_weight.assign(p.out_weight.data(), p.out_weight.data() + p.dim());
  h.out_bias = p.out_bias;
  return h;
}

/// Same layout as SlsParams::flatten, built without it.
inline oracle::PlainHead plain_from_flat(const std::vector<double>& x) {
  const std::size_t d = (x.size() - 2) / 2;
  oracle::PlainHead h;
  h.gate_weight.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(d));
  h.gate_bias = x[d];
  h.out_weight.assign(x.begin() + static_cast<std::ptrdiff_t>(d + 1),
                      x.begin() + static_cast<std::ptrdiff_t>(2 * d + 1));
  h.out_bias = x[2 * d + 1];
  return h;
}

inline std::vector<double> flat(const SlsParams<double>& p) {
  const auto v = p.flatten();
  return {v.data(), v.data() + v.size()};
}

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("slsdet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sls::test

#endif  // SLS_TESTS_HELPERS_HPP
