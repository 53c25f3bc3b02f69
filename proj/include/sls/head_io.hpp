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

#ifndef SLS_HEAD_IO_HPP
#define SLS_HEAD_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sls/sls_head.hpp"

namespace sls {

// Checkpoint layout, little-endian:
//   "SLSP" | u16 version=1 | u32 D | D x f64 gate_weight | f64 gate_bias |
//   D x f64 out_weight | f64 out_bias
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(const SlsParams<double>& params, std::ostream& out);
SlsParams<double> read_checkpoint(std::istream& in);
void write_checkpoint_file(const SlsParams<double>& params,
                           const std::filesystem::path& path);
SlsParams<double> read_checkpoint_file(const std::filesystem::path& path);

struct LayerWeightRow {
  std::string utterance_id;
  Eigen::VectorXd weights;
};

/// CSV with header `utterance_id,layer_0,...,layer_{L-1}`. All rows must
/// share one layer count.
void write_layer_weights_csv(const std::vector<LayerWeightRow>& rows,
                             std::ostream& out);

}  // namespace sls

#endif  // SLS_HEAD_IO_HPP
