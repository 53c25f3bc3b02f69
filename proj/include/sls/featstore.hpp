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

#ifndef SLS_FEATSTORE_HPP
#define SLS_FEATSTORE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace sls {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// True when `id` is non-empty and free of whitespace, control bytes and
/// path separators.
bool is_valid_utterance_id(std::string_view id) noexcept;

/**
   One utterance's backbone output: L layers of N frames by D features.

   Values are stored as binary32 in layer-major, frame-major, feature order
   (the on-disk payload order), so each layer is a row-major N x D block.
   Instances are validated on construction and immutable afterwards.
*/
class HiddenStack {
 public:
  using LayerView = Eigen::Map<const RowMatrixXf>;

  /// Throws DataError if any dimension is zero, `values` has the wrong
  /// length, holds a non-finite entry, or the id is invalid.
  HiddenStack(std::string utterance_id, std::uint32_t layers,
              std::uint32_t frames, std::uint32_t dim,
              std::vector<float> values);

  const std::string& utterance_id() const noexcept { return id_; }
  std::uint32_t layers() const noexcept { return layers_; }
  std::uint32_t frames() const noexcept { return frames_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::span<const float> values() const noexcept { return values_; }

  /// N x D view of layer `l`.
  LayerView layer(std::uint32_t l) const {
    return LayerView(values_.data() + std::size_t{l} * frames_ * dim_,
                     frames_, dim_);
  }

  /// Field-for-field equality; floats compared by bit pattern.
  friend bool operator==(const HiddenStack& a, const HiddenStack& b) noexcept;

 private:
  std::string id_;
  std::uint32_t layers_;
  std::uint32_t frames_;
  std::uint32_t dim_;
  std::vector<float> values_;
};

// HSTK binary layout, little-endian:
//   "HSTK" | u16 version=1 | u16 flags=0 | u32 L | u32 N | u32 D |
//   u16 id_len | id bytes | L*N*D binary32
inline constexpr std::uint16_t kHstkVersion = 1;
inline constexpr std::size_t kHstkFixedHeaderBytes = 22;

/// Writes `stack` and returns the number of bytes emitted.
std::uint64_t write_hstk(const HiddenStack& stack, std::ostream& out);
/// Parses one HSTK stream. The stream must end right after the payload.
HiddenStack read_hstk(std::istream& in);

std::uint64_t write_hstk_file(const HiddenStack& stack,
                              const std::filesystem::path& path);
HiddenStack read_hstk_file(const std::filesystem::path& path);

/// Conventional location of an utterance's stack inside a feature dir.
std::filesystem::path hstk_path(const std::filesystem::path& dir,
                                std::string_view utterance_id);

enum class Label : std::uint8_t { kDeepfake = 0, kBonafide = 1 };

struct TrialRecord {
  std::string utterance_id;
  Label label = Label::kDeepfake;
  std::string attack_type;  // "-" for bonafide
  std::string origin;

  bool bonafide() const noexcept { return label == Label::kBonafide; }
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Ordered trial list with unique utterance ids.
class Manifest {
 public:
  Manifest() = default;
  /// Throws DataError on a duplicate id or a record violating the
  /// bonafide/attack-tag pairing.
  Manifest(std::vector<TrialRecord> records, std::string source);

  const std::vector<TrialRecord>& records() const noexcept { return records_; }
  const std::string& source() const noexcept { return source_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const TrialRecord* find(std::string_view id) const;

 private:
  std::vector<TrialRecord> records_;
  std::string source_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Four-column TSV: utterance_id, label (0|1), attack_type, origin.
/// Blank lines and lines starting with '#' are skipped.
Manifest read_manifest(std::istream& in, std::string source = "<stream>");
Manifest read_manifest_file(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, std::ostream& out);
void write_manifest_file(const Manifest& manifest,
                         const std::filesystem::path& path);

/**
   Column map for external whitespace-separated key files.

   Columns are zero-based. The defaults follow the ASVspoof-style layout
   `speaker utt_id - attack_type key` with `bonafide`/`deepfake` keys; an
   `origin_column` of nullopt assigns `default_origin` to every row.
*/
struct KeyColumnMap {
  std::size_t id_column = 1;
  std::size_t attack_column = 3;
  std::size_t label_column = 4;
  std::optional<std::size_t> origin_column;
  std::string bonafide_token = "bonafide";
  std::string deepfake_token = "deepfake";
  std::string default_origin = "unknown";
};

Manifest read_key_file(std::istream& in, const KeyColumnMap& columns,
                       std::string source = "<stream>");

/// Parameters of a synthetic two-class fixture.
struct FixtureSpec {
  std::string prefix = "utt";
  std::uint32_t per_class = 1;
  std::uint32_t layers = 4;
  std::uint32_t frames = 16;
  std::uint32_t dim = 16;
  /// Distance between the class means on the informative features.
  double separation = 0.0;
  std::uint64_t seed = 0;
};

struct Fixture {
  std::vector<HiddenStack> stacks;
  Manifest manifest;
};

/**
   Draws a labelled fixture. Every entry is unit-variance noise; on the
   informative features (the first max(1, D/2)) bonafide stacks add
   +separation/2 and deepfake stacks -separation/2, identically for every
   layer and frame. Bonafide rows come first. Deepfake rows cycle through
   attack tags A09..A14 and all rows cycle through the origins kising,
   m4singer and acesinger. Output depends only on `spec`.
*/
Fixture synth_fixture(const FixtureSpec& spec);

/// Writes every stack to `hstk_path(feature_dir, id)`.
void write_fixture_stacks(const Fixture& fixture,
                          const std::filesystem::path& feature_dir);

/// Number of informative leading features for dimension `dim`.
constexpr std::uint32_t informative_features(std::uint32_t dim) noexcept {
  return dim / 2 == 0 ? 1 : dim / 2;
}

}  // namespace sls

#endif  // SLS_FEATSTORE_HPP
