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

#ifndef SLS_EVAL_METRICS_HPP
#define SLS_EVAL_METRICS_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sls/ensemble.hpp"
#include "sls/featstore.hpp"

namespace sls {

struct ScoredTrial {
  std::string utterance_id;
  double score = 0.0;
  Label label = Label::kDeepfake;
  std::string attack_type;
  std::string origin;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::size_t n_bonafide = 0;
  std::size_t n_spoof = 0;
};

/**
   Equal error rate with "score >= threshold accepts as bonafide".

   FAR(t) is the fraction of spoof scores >= t and FRR(t) the fraction of
   bonafide scores < t. Thresholds sweep the sorted unique scores bracketed
   by -inf and +inf, so FAR - FRR starts at +1 and ends at -1. At the first
   threshold where FAR - FRR <= 0 the EER is the common rate if they are
   equal, otherwise the rates are linearly interpolated to the crossing with
   the previous threshold. The reported threshold is the last one with
   FAR >= FRR. Throws DataError unless both classes are present.
*/
EerResult compute_eer(std::span<const double> bonafide,
                      std::span<const double> spoof);
EerResult compute_eer(std::span<const ScoredTrial> trials);

/// Attaches manifest metadata to each score. Every scored id must be in
/// the manifest; manifest rows without a score are ignored.
std::vector<ScoredTrial> join_scores(const std::vector<ScoreEntry>& scores,
                                     const Manifest& manifest);

struct BreakdownMode {
  enum class Kind { kOverall, kPerAttack, kPerOrigin, kExcludeOrigin };
  Kind kind = Kind::kOverall;
  std::string origin;  // only for kExcludeOrigin

  static BreakdownMode overall() { return {Kind::kOverall, {}}; }
  static BreakdownMode per_attack() { return {Kind::kPerAttack, {}}; }
  static BreakdownMode per_origin() { return {Kind::kPerOrigin, {}}; }
  static BreakdownMode exclude_origin(std::string o) {
    return {Kind::kExcludeOrigin, std::move(o)};
  }
};

/// One named subset: "overall", an attack tag, an origin, or "w/o_<origin>".
struct SliceResult {
  std::string slice;
  std::optional<EerResult> result;
};

struct Breakdown {
  std::vector<SliceResult> slices;
  std::vector<std::string> warnings;
};

/**
   per_attack pools all bonafide trials against one attack's spoofs (attack
   tags in sorted order); per_origin restricts to one origin's trials
   (origins in first-appearance order); exclude_origin pools every trial
   whose origin differs. Subsets lacking either class are omitted and
   reported in `warnings`.
*/
Breakdown breakdown(std::span<const ScoredTrial> trials,
                    const BreakdownMode& mode);

std::string exclude_slice_name(const std::string& origin);

/// Fixed column order of a rendered table: (slice name, column label).
struct ReportLayout {
  std::vector<std::pair<std::string, std::string>> columns;
};

/// A09..A14, overall, w/o acesinger.
ReportLayout attack_layout();
/// One column per origin, in the given order.
ReportLayout origin_layout(const std::vector<std::string>& origins);

struct Report {
  std::string text;
  std::string csv;
};

/**
   Renders a label line and a value line, space separated, with EER as a
   percentage to two decimals and "-" for slices without a result. The CSV
   twin has header `slice,eer,threshold,n_bonafide,n_spoof` and full
   precision fractions, one row per layout column.
*/
Report render_report(const std::vector<SliceResult>& results,
                     const ReportLayout& layout);

/// Full-precision CSV of `results` in the given order, same format as the
/// render_report twin.
std::string results_csv(const std::vector<SliceResult>& results);

/// Reads a CSV in the render_report format. "-" marks an absent value; a
/// row whose eer is "-" yields an empty result, other "-" fields become
/// NaN or zero counts.
std::vector<SliceResult> read_results_csv(std::istream& in,
                                          const std::string& source);

}  // namespace sls

#endif  // SLS_EVAL_METRICS_HPP
