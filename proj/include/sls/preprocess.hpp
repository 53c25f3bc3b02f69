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

#ifndef SLS_PREPROCESS_HPP
#define SLS_PREPROCESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sls {

inline constexpr std::uint32_t kSampleRate = 16000;
inline constexpr std::size_t kWindowSamples = 4 * kSampleRate;

/// Mono audio at 16 kHz with finite samples in [-1, 1].
class Waveform {
 public:
  /// Throws DataError on an empty signal, a non-finite or out-of-range
  /// sample, or a rate other than 16 kHz.
  explicit Waveform(Eigen::VectorXf samples, std::uint32_t sample_rate = kSampleRate);

  const Eigen::VectorXf& samples() const noexcept { return samples_; }
  std::uint32_t sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.size()); }

 private:
  Eigen::VectorXf samples_;
  std::uint32_t sample_rate_;
};

enum class CropMode {
  kRandom,  // offset drawn from the seeded generator (training)
  kHead,    // offset 0 (evaluation)
};

/// Crop offset used by fit_to_window for an input of `length` samples:
/// 0 unless length > target and mode is kRandom, in which case it is
/// `Rng(seed).uniform_index(length - target + 1)`.
std::size_t window_offset(std::size_t length, std::size_t target,
                          std::uint64_t seed, CropMode mode = CropMode::kRandom);

/**
   Fixed-length input rule. Longer inputs are cropped to a contiguous slice
   at window_offset(); shorter inputs are tiled end to end and truncated;
   inputs of exactly `target` samples pass through unchanged.
*/
Waveform fit_to_window(const Waveform& wave, std::size_t target = kWindowSamples,
                       std::uint64_t seed = 0, CropMode mode = CropMode::kRandom);

/// Seed for re-drawing a crop every epoch.
std::uint64_t epoch_crop_seed(std::uint64_t seed, std::uint64_t epoch) noexcept;

struct WindowGolden {
  std::size_t length;
  std::uint64_t seed;
  std::size_t offset;
  friend bool operator==(const WindowGolden&, const WindowGolden&) = default;
};

/// Golden vectors for the crop rule at the default 64000-sample target.
std::vector<WindowGolden> make_window_goldens(
    const std::vector<std::size_t>& lengths,
    const std::vector<std::uint64_t>& seeds);

/// TSV `length<TAB>seed<TAB>offset`, with a leading '#' header comment.
void write_window_goldens(const std::vector<WindowGolden>& rows, std::ostream& out);
std::vector<WindowGolden> read_window_goldens(std::istream& in,
                                              const std::string& source);

}  // namespace sls

#endif  // SLS_PREPROCESS_HPP
