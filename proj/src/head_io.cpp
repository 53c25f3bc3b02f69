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

#include "sls/head_io.hpp"

#include <cstring>
#include <fstream>

#include "byte_io.hpp"
#include "sls/format.hpp"

namespace sls {

void write_checkpoint(const SlsParams<double>& params, std::ostream& out) {
  if (params.gate_weight.size() != params.out_weight.size() ||
      params.dim() < 1)
    throw DataError("checkpoint: inconsistent parameter shapes");
  out.write("SLSP", 4);
  detail::put_le<std::uint16_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dim()));
  for (Eigen::Index d = 0; d < params.dim(); ++d)
    detail::put_f64(out, params.gate_weight(d));
  detail::put_f64(out, params.gate_bias);
  for (Eigen::Index d = 0; d < params.dim(); ++d)
    detail::put_f64(out, params.out_weight(d));
  detail::put_f64(out, params.out_bias);
  if (!out) throw DataError("checkpoint write failed");
}

SlsParams<double> read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "SLSP", 4) != 0)
    throw DataError("not an SLSP checkpoint");
  const auto version = detail::get_le<std::uint16_t>(in, "truncated");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto dim = detail::get_le<std::uint32_t>(in, "truncated");
  if (dim == 0) throw DataError("checkpoint: D must be positive");
  auto params = SlsParams<double>::zeros(0);
  std::vector<double> gate, out;
  for (std::uint32_t d = 0; d < dim; ++d) gate.push_back(detail::get_f64(in, "truncated"));
  params.gate_bias = detail::get_f64(in, "truncated");
  for (std::uint32_t d = 0; d < dim; ++d) out.push_back(detail::get_f64(in, "truncated"));
  params.out_bias = detail::get_f64(in, "truncated");
  if (!detail::at_end(in)) throw DataError("trailing bytes after checkpoint");
  params.gate_weight = Eigen::Map<const Eigen::VectorXd>(gate.data(), dim);
  params.out_weight = Eigen::Map<const Eigen::VectorXd>(out.data(), dim);
  if (!params.all_finite()) throw DataError("checkpoint: corrupt values");
  return params;
}

void write_checkpoint_file(const SlsParams<double>& params,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_checkpoint(params, out);
  if (!out.flush()) throw DataError(path.string() + ": write failed");
}

SlsParams<double> read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open checkpoint");
  try {
    return read_checkpoint(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_layer_weights_csv(const std::vector<LayerWeightRow>& rows,
                             std::ostream& out) {
  const Eigen::Index layers = rows.empty() ? 0 : rows.front().weights.size();
  out << "utterance_id";
  for (Eigen::Index l = 0; l < layers; ++l) out << ",layer_" << l;
  out << '\n';
  for (const auto& row : rows) {
    if (row.weights.size() != layers)
      throw DataError("layer weights: '" + row.utterance_id + "' has " +
                      std::to_string(row.weights.size()) + " layers, expected " +
                      std::to_string(layers));
    out << row.utterance_id;
    for (Eigen::Index l = 0; l < layers; ++l)
      out << ',' << format_real(row.weights(l));
    out << '\n';
  }
}

}  // namespace sls
