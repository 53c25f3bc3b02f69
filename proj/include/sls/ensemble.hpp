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

#ifndef SLS_ENSEMBLE_HPP
#define SLS_ENSEMBLE_HPP

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sls {

struct ScoreEntry {
  std::string utterance_id;
  double score = 0.0;
  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

/// Max-voting fusion: the score with the larger magnitude wins; on equal
/// magnitudes the first (XLS-R branch) score is returned.
inline double fuse_max_abs(double s_x, double s_w) noexcept {
  return std::fabs(s_x) >= std::fabs(s_w) ? s_x : s_w;
}

/// Score TSV: `utterance_id<TAB>score`, one per line. Rejects duplicate
/// ids, malformed lines and non-finite scores.
std::vector<ScoreEntry> read_scores(std::istream& in,
                                    const std::string& source);
std::vector<ScoreEntry> read_scores_file(const std::filesystem::path& path);
/// Scores are printed with 17 significant digits.
void write_scores(const std::vector<ScoreEntry>& scores, std::ostream& out);
void write_scores_file(const std::vector<ScoreEntry>& scores,
                       const std::filesystem::path& path);

/// Row-wise fusion in `scores_x` order. Both lists must hold exactly the
/// same ids; otherwise throws DataError listing up to ten offenders.
std::vector<ScoreEntry> fuse_scores(const std::vector<ScoreEntry>& scores_x,
                                    const std::vector<ScoreEntry>& scores_w);

void fuse_files(const std::filesystem::path& file_x,
                const std::filesystem::path& file_w,
                const std::filesystem::path& out);

}  // namespace sls

#endif  // SLS_ENSEMBLE_HPP
