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

#include <array>
#include <cmath>
#include <string_view>

#include "sls/error.hpp"
#include "sls/featstore.hpp"
#include "sls/rng.hpp"

namespace sls {
namespace {

constexpr std::array<std::string_view, 6> kAttacks = {"A09", "A10", "A11",
                                                      "A12", "A13", "A14"};
constexpr std::array<std::string_view, 3> kOrigins = {"kising", "m4singer",
                                                      "acesinger"};

std::string make_id(std::string_view prefix, std::string_view cls,
                    std::uint32_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return std::string(prefix) + "_" + std::string(cls) + "_" + digits;
}

}  // namespace

Fixture synth_fixture(const FixtureSpec& spec) {
  if (spec.per_class == 0) throw DataError("fixture: per_class must be >= 1");
  if (spec.layers == 0 || spec.frames == 0 || spec.dim == 0)
    throw DataError("fixture: L, N and D must be >= 1");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation))
    throw DataError("fixture: separation must be finite and >= 0");
  if (!is_valid_utterance_id(spec.prefix))
    throw DataError("fixture: invalid id prefix '" + spec.prefix + "'");

  Rng rng(spec.seed);
  const std::uint32_t informative = informative_features(spec.dim);
  const std::size_t count =
      std::size_t{spec.layers} * spec.frames * spec.dim;

  Fixture fixture;
  std::vector<TrialRecord> records;
  const std::uint32_t total = 2 * spec.per_class;
  fixture.stacks.reserve(total);
  records.reserve(total);
  for (std::uint32_t i = 0; i < total; ++i) {
    const bool bonafide = i < spec.per_class;
    const std::uint32_t k = bonafide ? i : i - spec.per_class;
    const double shift = (bonafide ? 0.5 : -0.5) * spec.separation;

    std::vector<float> values(count);
    std::size_t at = 0;
    for (std::uint32_t l = 0; l < spec.layers; ++l)
      for (std::uint32_t n = 0; n < spec.frames; ++n)
        for (std::uint32_t d = 0; d < spec.dim; ++d)
          values[at++] = static_cast<float>(rng.noise() +
                                            (d < informative ? shift : 0.0));

    TrialRecord r;
    r.utterance_id = make_id(spec.prefix, bonafide ? "bona" : "spoof", k);
    r.label = bonafide ? Label::kBonafide : Label::kDeepfake;
    r.attack_type = bonafide ? "-" : std::string(kAttacks[k % kAttacks.size()]);
    r.origin = std::string(kOrigins[k % kOrigins.size()]);
    fixture.stacks.emplace_back(r.utterance_id, spec.layers, spec.frames,
                                spec.dim, std::move(values));
    records.push_back(std::move(r));
  }
  fixture.manifest = Manifest(std::move(records), "synth:" + spec.prefix);
  return fixture;
}

void write_fixture_stacks(const Fixture& fixture,
                          const std::filesystem::path& feature_dir) {
  std::filesystem::create_directories(feature_dir);
  for (const auto& stack : fixture.stacks)
    write_hstk_file(stack, hstk_path(feature_dir, stack.utterance_id()));
}

}  // namespace sls
