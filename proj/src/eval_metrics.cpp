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

#include "sls/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "sls/error.hpp"
#include "sls/format.hpp"

namespace sls {
namespace {

// Rates as exact fractions: FAR = spoof_accepted / n_spoof,
// FRR = bona_rejected / n_bona.
struct Operating {
  double threshold;
  std::size_t spoof_accepted;
  std::size_t bona_rejected;
};

}  // namespace

EerResult compute_eer(std::span<const double> bonafide,
                      std::span<const double> spoof) {
  if (bonafide.empty() || spoof.empty())
    throw DataError("EER needs at least one bonafide and one spoof trial (got " +
                    std::to_string(bonafide.size()) + " bonafide, " +
                    std::to_string(spoof.size()) + " spoof)");
  std::vector<double> bona(bonafide.begin(), bonafide.end());
  std::vector<double> fake(spoof.begin(), spoof.end());
  std::sort(bona.begin(), bona.end());
  std::sort(fake.begin(), fake.end());
  const std::size_t nb = bona.size();
  const std::size_t ns = fake.size();

  // Sign of FAR - FRR, compared exactly by cross-multiplication.
  const auto margin = [&](const Operating& op) {
    return static_cast<std::int64_t>(op.spoof_accepted * nb) -
           static_cast<std::int64_t>(op.bona_rejected * ns);
  };
  const auto far = [&](const Operating& op) {
    return static_cast<double>(op.spoof_accepted) / static_cast<double>(ns);
  };
  const auto frr = [&](const Operating& op) {
    return static_cast<double>(op.bona_rejected) / static_cast<double>(nb);
  };

  Operating prev{-std::numeric_limits<double>::infinity(), ns, 0};
  std::size_t ib = 0, is = 0;
  for (;;) {
    Operating cur;
    if (ib == nb && is == ns) {
      cur = {std::numeric_limits<double>::infinity(), 0, nb};
    } else {
      const double t = ib == nb   ? fake[is]
                       : is == ns ? bona[ib]
                                  : std::min(bona[ib], fake[is]);
      cur = {t, ns - is, ib};
      // Everything at exactly t is still accepted at threshold t; advance
      // past it so the next threshold sees it rejected.
      while (ib < nb && bona[ib] == t) ++ib;
      while (is < ns && fake[is] == t) ++is;
    }
    const std::int64_t m = margin(cur);
    if (m == 0) return {far(cur), cur.threshold, nb, ns};
    if (m < 0) {
      const double d_prev = far(prev) - frr(prev);
      const double d_cur = far(cur) - frr(cur);
      const double w = d_prev / (d_prev - d_cur);
      const double eer = far(prev) + w * (far(cur) - far(prev));
      return {eer, prev.threshold, nb, ns};
    }
    prev = cur;
  }
}

EerResult compute_eer(std::span<const ScoredTrial> trials) {
  std::vector<double> bona, spoof;
  for (const auto& t : trials)
    (t.label == Label::kBonafide ? bona : spoof).push_back(t.score);
  return compute_eer(bona, spoof);
}

std::vector<ScoredTrial> join_scores(const std::vector<ScoreEntry>& scores,
                                     const Manifest& manifest) {
  std::vector<ScoredTrial> trials;
  trials.reserve(scores.size());
  std::vector<std::string> unknown;
  for (const auto& s : scores) {
    const TrialRecord* r = manifest.find(s.utterance_id);
    if (!r) {
      unknown.push_back(s.utterance_id);
      continue;
    }
    trials.push_back({s.utterance_id, s.score, r->label, r->attack_type,
                      r->origin});
  }
  if (!unknown.empty()) {
    std::string msg = std::to_string(unknown.size()) +
                      " scored id(s) missing from manifest " +
                      manifest.source() + ":";
    for (std::size_t i = 0; i < unknown.size() && i < 10; ++i)
      msg += " " + unknown[i];
    throw DataError(msg);
  }
  return trials;
}

std::string exclude_slice_name(const std::string& origin) {
  return "w/o_" + origin;
}

namespace {

void add_slice(Breakdown& out, std::string name,
               const std::vector<double>& bona,
               const std::vector<double>& spoof) {
  if (bona.empty() || spoof.empty()) {
    out.warnings.push_back("slice '" + name + "' omitted: " +
                           std::to_string(bona.size()) + " bonafide, " +
                           std::to_string(spoof.size()) + " spoof trials");
    return;
  }
  out.slices.push_back({std::move(name), compute_eer(bona, spoof)});
}

}  // namespace

Breakdown breakdown(std::span<const ScoredTrial> trials,
                    const BreakdownMode& mode) {
  if (trials.empty()) throw DataError("breakdown: no trials");
  Breakdown out;
  using Kind = BreakdownMode::Kind;
  switch (mode.kind) {
    case Kind::kOverall:
    case Kind::kExcludeOrigin: {
      const bool exclude = mode.kind == Kind::kExcludeOrigin;
      std::vector<double> bona, spoof;
      for (const auto& t : trials) {
        if (exclude && t.origin == mode.origin) continue;
        (t.label == Label::kBonafide ? bona : spoof).push_back(t.score);
      }
      add_slice(out, exclude ? exclude_slice_name(mode.origin) : "overall",
                bona, spoof);
      break;
    }
    case Kind::kPerAttack: {
      std::vector<double> bona;
      std::map<std::string, std::vector<double>> by_attack;
      for (const auto& t : trials) {
        if (t.label == Label::kBonafide) bona.push_back(t.score);
        else by_attack[t.attack_type].push_back(t.score);
      }
      for (const auto& [attack, spoof] : by_attack)
        add_slice(out, attack, bona, spoof);
      break;
    }
    case Kind::kPerOrigin: {
      std::vector<std::string> order;
      std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
          by_origin;
      for (const auto& t : trials) {
        auto [it, fresh] = by_origin.try_emplace(t.origin);
        if (fresh) order.push_back(t.origin);
        (t.label == Label::kBonafide ? it->second.first : it->second.second)
            .push_back(t.score);
      }
      for (const auto& origin : order)
        add_slice(out, origin, by_origin[origin].first,
                  by_origin[origin].second);
      break;
    }
  }
  return out;
}

ReportLayout attack_layout() {
  return {{{"A09", "A09"},
           {"A10", "A10"},
           {"A11", "A11"},
           {"A12", "A12"},
           {"A13", "A13"},
           {"A14", "A14"},
           {"overall", "overall"},
           {exclude_slice_name("acesinger"), "w/o_acesinger"}}};
}

ReportLayout origin_layout(const std::vector<std::string>& origins) {
  ReportLayout layout;
  for (const auto& o : origins) layout.columns.emplace_back(o, o);
  return layout;
}

std::string results_csv(const std::vector<SliceResult>& results) {
  std::string csv = "slice,eer,threshold,n_bonafide,n_spoof\n";
  for (const auto& [slice, r] : results) {
    csv += slice;
    if (r) {
      csv += "," + format_real(r->eer) + "," +
             (std::isnan(r->threshold) ? std::string("-")
                                       : format_real(r->threshold)) +
             "," + std::to_string(r->n_bonafide) + "," +
             std::to_string(r->n_spoof) + "\n";
    } else {
      csv += ",-,-,-,-\n";
    }
  }
  return csv;
}

Report render_report(const std::vector<SliceResult>& results,
                     const ReportLayout& layout) {
  const auto lookup = [&](const std::string& slice) -> std::optional<EerResult> {
    for (const auto& r : results)
      if (r.slice == slice && r.result) return r.result;
    return std::nullopt;
  };
  std::string labels, values;
  std::vector<SliceResult> ordered;
  for (std::size_t i = 0; i < layout.columns.size(); ++i) {
    const auto& [slice, label] = layout.columns[i];
    const auto r = lookup(slice);
    if (i > 0) {
      labels += ' ';
      values += ' ';
    }
    labels += label;
    values += r ? format_fixed(100.0 * r->eer, 2) : "-";
    ordered.push_back({slice, r});
  }
  return {labels + "\n" + values + "\n", results_csv(ordered)};
}

std::vector<SliceResult> read_results_csv(std::istream& in,
                                          const std::string& source) {
  std::vector<SliceResult> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (line != "slice,eer,threshold,n_bonafide,n_spoof")
        throw DataError(where + "expected header 'slice,eer,threshold,n_bonafide,n_spoof'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss{std::string(line)};
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5 || fields[0].empty())
      throw DataError(where + "expected 5 comma-separated fields");
    SliceResult row{fields[0], std::nullopt};
    if (fields[1] != "-") {
      EerResult r;
      const auto eer = parse_real(fields[1]);
      if (!eer || !(*eer >= 0.0 && *eer <= 1.0))
        throw DataError(where + "eer must be a fraction in [0, 1]");
      r.eer = *eer;
      if (fields[2] == "-") {
        r.threshold = std::numeric_limits<double>::quiet_NaN();
      } else {
        const auto t = parse_real(fields[2]);
        if (!t) throw DataError(where + "bad threshold");
        r.threshold = *t;
      }
      for (int k = 3; k <= 4; ++k) {
        std::size_t count = 0;
        if (fields[k] != "-") {
          const auto c = parse_uint(fields[k]);
          if (!c) throw DataError(where + "bad count");
          count = static_cast<std::size_t>(*c);
        }
        (k == 3 ? r.n_bonafide : r.n_spoof) = count;
      }
      row.result = r;
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw DataError(source + ": empty results file");
  return rows;
}

}  // namespace sls
