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

#include "sls/ensemble.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "sls/error.hpp"
#include "sls/featstore.hpp"
#include "sls/format.hpp"

namespace sls {

std::vector<ScoreEntry> read_scores(std::istream& in,
                                    const std::string& source) {
  std::vector<ScoreEntry> scores;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos ||
        line.find('\t', tab + 1) != std::string_view::npos)
      throw DataError(where + "expected 'utterance_id<TAB>score'");
    ScoreEntry entry{std::string(line.substr(0, tab)), 0.0};
    if (!is_valid_utterance_id(entry.utterance_id))
      throw DataError(where + "invalid utterance id");
    const auto value = parse_real(line.substr(tab + 1));
    if (!value || !std::isfinite(*value))
      throw DataError(where + "score is not a finite number");
    entry.score = *value;
    const auto [it, fresh] = seen.emplace(entry.utterance_id, line_no);
    if (!fresh)
      throw DataError(where + "duplicate utterance id '" + entry.utterance_id +
                      "' (first on line " + std::to_string(it->second) + ")");
    scores.push_back(std::move(entry));
  }
  if (in.bad()) throw DataError(source + ": read error");
  return scores;
}

std::vector<ScoreEntry> read_scores_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open score file");
  return read_scores(in, path.string());
}

void write_scores(const std::vector<ScoreEntry>& scores, std::ostream& out) {
  for (const auto& s : scores)
    out << s.utterance_id << '\t' << format_real(s.score) << '\n';
}

void write_scores_file(const std::vector<ScoreEntry>& scores,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_scores(scores, out);
  if (!out.flush()) throw DataError(path.string() + ": write failed");
}

std::vector<ScoreEntry> fuse_scores(const std::vector<ScoreEntry>& scores_x,
                                    const std::vector<ScoreEntry>& scores_w) {
  std::unordered_map<std::string_view, double> by_id;
  for (const auto& s : scores_w)
    if (!by_id.emplace(s.utterance_id, s.score).second)
      throw DataError("duplicate utterance id '" + s.utterance_id +
                      "' in second score list");

  std::vector<std::string> mismatched;
  std::unordered_set<std::string_view> seen_x;
  std::vector<ScoreEntry> fused;
  fused.reserve(scores_x.size());
  for (const auto& s : scores_x) {
    if (!seen_x.insert(s.utterance_id).second)
      throw DataError("duplicate utterance id '" + s.utterance_id +
                      "' in first score list");
    const auto it = by_id.find(s.utterance_id);
    if (it == by_id.end()) {
      mismatched.push_back(s.utterance_id + " (first only)");
      continue;
    }
    fused.push_back({s.utterance_id, fuse_max_abs(s.score, it->second)});
  }
  for (const auto& s : scores_w)
    if (!seen_x.contains(s.utterance_id))
      mismatched.push_back(s.utterance_id + " (second only)");

  if (!mismatched.empty()) {
    std::string msg = std::to_string(mismatched.size()) +
                      " utterance id(s) not present in both score files:";
    for (std::size_t i = 0; i < mismatched.size() && i < 10; ++i)
      msg += " " + mismatched[i];
    if (mismatched.size() > 10) msg += " ...";
    throw DataError(msg);
  }
  return fused;
}

void fuse_files(const std::filesystem::path& file_x,
                const std::filesystem::path& file_w,
                const std::filesystem::path& out) {
  const auto x = read_scores_file(file_x);
  const auto w = read_scores_file(file_w);
  write_scores_file(fuse_scores(x, w), out);
}

}  // namespace sls
