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

#include <algorithm>
#include <fstream>

#include "sls/error.hpp"
#include "sls/featstore.hpp"

namespace sls {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool is_tag(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (static_cast<unsigned char>(c) <= 0x20 || c == 0x7F) return false;
  return true;
}

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

void check_record(const TrialRecord& r, const std::string& where) {
  if (!is_valid_utterance_id(r.utterance_id))
    throw DataError(where + "invalid utterance id '" + r.utterance_id + "'");
  if (!is_tag(r.attack_type))
    throw DataError(where + "empty or malformed attack_type");
  if (!is_tag(r.origin)) throw DataError(where + "empty or malformed origin");
  if (r.bonafide() && r.attack_type != "-")
    throw DataError(where + "bonafide row '" + r.utterance_id +
                    "' carries attack tag '" + r.attack_type + "'");
  if (!r.bonafide() && r.attack_type == "-")
    throw DataError(where + "deepfake row '" + r.utterance_id +
                    "' has no attack tag");
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

Manifest::Manifest(std::vector<TrialRecord> records, std::string source)
    : records_(std::move(records)), source_(std::move(source)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_record(records_[i], source_ + ": ");
    if (!index_.emplace(records_[i].utterance_id, i).second)
      throw DataError(source_ + ": duplicate utterance id '" +
                      records_[i].utterance_id + "'");
  }
}

const TrialRecord* Manifest::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

Manifest read_manifest(std::istream& in, std::string source) {
  std::vector<TrialRecord> records;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4)
      fail(source, line_no,
           "expected 4 tab-separated columns, got " +
               std::to_string(fields.size()));
    TrialRecord r;
    r.utterance_id = std::string(fields[0]);
    if (fields[1] == "1") r.label = Label::kBonafide;
    else if (fields[1] == "0") r.label = Label::kDeepfake;
    else fail(source, line_no, "bad label '" + std::string(fields[1]) + "' (expected 0 or 1)");
    r.attack_type = std::string(fields[2]);
    r.origin = std::string(fields[3]);
    try {
      check_record(r, "");
    } catch (const DataError& e) {
      fail(source, line_no, e.what());
    }
    const auto [it, fresh] = first_line.emplace(r.utterance_id, line_no);
    if (!fresh)
      fail(source, line_no,
           "duplicate utterance id '" + r.utterance_id + "' (first on line " +
               std::to_string(it->second) + ")");
    records.push_back(std::move(r));
  }
  if (in.bad()) throw DataError(source + ": read error");
  return Manifest(std::move(records), std::move(source));
}

Manifest read_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open manifest");
  return read_manifest(in, path.string());
}

void write_manifest(const Manifest& manifest, std::ostream& out) {
  for (const auto& r : manifest.records())
    out << r.utterance_id << '\t' << (r.bonafide() ? '1' : '0') << '\t'
        << r.attack_type << '\t' << r.origin << '\n';
}

void write_manifest_file(const Manifest& manifest,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_manifest(manifest, out);
  if (!out.flush()) throw DataError(path.string() + ": write failed");
}

Manifest read_key_file(std::istream& in, const KeyColumnMap& columns,
                       std::string source) {
  std::size_t needed = std::max({columns.id_column, columns.attack_column,
                                 columns.label_column});
  if (columns.origin_column) needed = std::max(needed, *columns.origin_column);

  std::vector<TrialRecord> records;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    const auto fields = split_whitespace(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    if (fields.size() <= needed)
      fail(source, line_no,
           "expected at least " + std::to_string(needed + 1) + " columns, got " +
               std::to_string(fields.size()));
    TrialRecord r;
    r.utterance_id = std::string(fields[columns.id_column]);
    const std::string_view key = fields[columns.label_column];
    if (key == columns.bonafide_token) r.label = Label::kBonafide;
    else if (key == columns.deepfake_token) r.label = Label::kDeepfake;
    else fail(source, line_no, "bad label '" + std::string(key) + "'");
    r.attack_type =
        r.bonafide() ? "-" : std::string(fields[columns.attack_column]);
    r.origin = columns.origin_column
                   ? std::string(fields[*columns.origin_column])
                   : columns.default_origin;
    try {
      check_record(r, "");
    } catch (const DataError& e) {
      fail(source, line_no, e.what());
    }
    const auto [it, fresh] = first_line.emplace(r.utterance_id, line_no);
    if (!fresh)
      fail(source, line_no,
           "duplicate utterance id '" + r.utterance_id + "' (first on line " +
               std::to_string(it->second) + ")");
    records.push_back(std::move(r));
  }
  return Manifest(std::move(records), std::move(source));
}

}  // namespace sls
