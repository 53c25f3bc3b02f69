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

#include "sls/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "sls/error.hpp"
#include "sls/format.hpp"
#include "sls/rng.hpp"

namespace sls {

Waveform::Waveform(Eigen::VectorXf samples, std::uint32_t sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ != kSampleRate)
    throw DataError("waveform: sample rate must be 16000 Hz, got " +
                    std::to_string(sample_rate_));
  if (samples_.size() == 0) throw DataError("waveform: empty input");
  if (!samples_.allFinite()) throw DataError("waveform: non-finite sample");
  if (samples_.cwiseAbs().maxCoeff() > 1.0f)
    throw DataError("waveform: sample outside [-1, 1]");
}

std::size_t window_offset(std::size_t length, std::size_t target,
                          std::uint64_t seed, CropMode mode) {
  if (length <= target || mode == CropMode::kHead) return 0;
  Rng rng(seed);
  return static_cast<std::size_t>(rng.uniform_index(length - target + 1));
}

Waveform fit_to_window(const Waveform& wave, std::size_t target,
                       std::uint64_t seed, CropMode mode) {
  if (target == 0) throw DataError("fit_to_window: target must be positive");
  const auto& in = wave.samples();
  const auto length = static_cast<Eigen::Index>(wave.size());
  const auto want = static_cast<Eigen::Index>(target);
  if (length == want) return wave;
  if (length > want) {
    const auto offset =
        static_cast<Eigen::Index>(window_offset(wave.size(), target, seed, mode));
    return Waveform(in.segment(offset, want), wave.sample_rate());
  }
  Eigen::VectorXf out(want);
  for (Eigen::Index at = 0; at < want; at += length) {
    const Eigen::Index n = std::min(length, want - at);
    out.segment(at, n) = in.head(n);
  }
  return Waveform(std::move(out), wave.sample_rate());
}

std::uint64_t epoch_crop_seed(std::uint64_t seed, std::uint64_t epoch) noexcept {
  return derive_seed(seed, epoch + 1);
}

std::vector<WindowGolden> make_window_goldens(
    const std::vector<std::size_t>& lengths,
    const std::vector<std::uint64_t>& seeds) {
  std::vector<WindowGolden> rows;
  for (const auto length : lengths)
    for (const auto seed : seeds)
      rows.push_back({length, seed, window_offset(length, kWindowSamples, seed)});
  return rows;
}

void write_window_goldens(const std::vector<WindowGolden>& rows,
                          std::ostream& out) {
  out << "# length\tseed\toffset\n";
  for (const auto& r : rows)
    out << r.length << '\t' << r.seed << '\t' << r.offset << '\n';
}

std::vector<WindowGolden> read_window_goldens(std::istream& in,
                                              const std::string& source) {
  std::vector<WindowGolden> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    const auto length = parse_uint(line.substr(0, t1));
    const auto seed = t1 == std::string_view::npos
                          ? std::nullopt
                          : parse_uint(line.substr(t1 + 1, t2 - t1 - 1));
    const auto offset = t2 == std::string_view::npos
                            ? std::nullopt
                            : parse_uint(line.substr(t2 + 1));
    if (!length || !seed || !offset)
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": expected 'length<TAB>seed<TAB>offset'");
    rows.push_back({static_cast<std::size_t>(*length), *seed,
                    static_cast<std::size_t>(*offset)});
  }
  return rows;
}

}  // namespace sls
