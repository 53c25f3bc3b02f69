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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "sls/ensemble.hpp"
#include "sls/error.hpp"
#include "sls/rng.hpp"

namespace sls {
namespace {

TEST(FuseMaxAbs, Examples) {
  EXPECT_EQ(fuse_max_abs(2.0, -3.0), -3.0);
  EXPECT_EQ(fuse_max_abs(0.0, 0.0), 0.0);
  EXPECT_EQ(fuse_max_abs(1.5, -1.5), 1.5);
  EXPECT_EQ(fuse_max_abs(-1.5, 1.5), -1.5);
  EXPECT_EQ(fuse_max_abs(-4.0, 1.0), -4.0);
}

TEST(FuseMaxAbs, Invariants) {
  Rng rng(55);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
    const double f = fuse_max_abs(a, b);
    EXPECT_EQ(std::fabs(f), std::max(std::fabs(a), std::fabs(b)));
    EXPECT_TRUE(f == a || f == b);
    EXPECT_EQ(fuse_max_abs(-a, -b), -f);
  }
}

TEST(FuseMaxAbs, SignedZeroTieReturnsFirst) {
  EXPECT_TRUE(std::signbit(fuse_max_abs(-0.0, 0.0)));
  EXPECT_FALSE(std::signbit(fuse_max_abs(0.0, -0.0)));
}

std::vector<ScoreEntry> parse_scores(const std::string& text) {
  std::istringstream in(text);
  return read_scores(in, "s.tsv");
}

TEST(Scores, ReadWriteRoundTripIsExact) {
  Rng rng(1);
  std::vector<ScoreEntry> scores;
  for (int i = 0; i < 50; ++i)
    scores.push_back({"u" + std::to_string(i), rng.uniform(-1e3, 1e3)});
  scores.push_back({"tiny", 4.9e-324});
  std::ostringstream out;
  write_scores(scores, out);
  EXPECT_EQ(parse_scores(out.str()), scores);
}

TEST(Scores, RejectsMalformedLines) {
  EXPECT_THROW(parse_scores("a 1.0\n"), DataError);
  EXPECT_THROW(parse_scores("a\t1.0\textra\n"), DataError);
  EXPECT_THROW(parse_scores("a\tnan\n"), DataError);
  EXPECT_THROW(parse_scores("a\tinf\n"), DataError);
  EXPECT_THROW(parse_scores("a\t1.0x\n"), DataError);
  try {
    parse_scores("a\t1\nb\t2\na\t3\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "s.tsv:3: duplicate utterance id 'a' (first on line 1)");
  }
  EXPECT_EQ(parse_scores("# header\n\na\t-2\r\n").size(), 1u);
}

TEST(FuseScores, IdentityWhenBothStreamsAgree) {
  const auto x = parse_scores("a\t1\nb\t-2\nc\t0.5\n");
  EXPECT_EQ(fuse_scores(x, x), x);
}

TEST(FuseScores, PicksLargerMagnitudePerRow) {
  const auto x = parse_scores("a\t1\nb\t-2\nc\t0.5\n");
  const auto w = parse_scores("c\t-0.7\na\t-3\nb\t2\n");
  const auto fused = fuse_scores(x, w);
  ASSERT_EQ(fused.size(), 3u);
  EXPECT_EQ(fused[0], (ScoreEntry{"a", -3.0}));
  EXPECT_EQ(fused[1], (ScoreEntry{"b", -2.0}));
  EXPECT_EQ(fused[2], (ScoreEntry{"c", -0.7}));
}

TEST(FuseScores, OrderFollowsFirstStream) {
  Rng rng(2);
  std::vector<ScoreEntry> x, w;
  for (int i = 0; i < 30; ++i) {
    x.push_back({"u" + std::to_string(i), rng.uniform(-5, 5)});
    w.push_back({"u" + std::to_string(i), rng.uniform(-5, 5)});
  }
  const auto reference = fuse_scores(x, w);
  for (std::size_t i = w.size() - 1; i > 0; --i)
    std::swap(w[i], w[rng.uniform_index(i + 1)]);
  EXPECT_EQ(fuse_scores(x, w), reference);
}

TEST(FuseScores, MismatchedIdsAreListed) {
  const auto x = parse_scores("a\t1\nb\t2\n");
  const auto w = parse_scores("a\t1\nc\t2\n");
  try {
    fuse_scores(x, w);
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("b (first only)"), std::string::npos) << what;
    EXPECT_NE(what.find("c (second only)"), std::string::npos) << what;
  }
  std::vector<ScoreEntry> many;
  for (int i = 0; i < 25; ++i) many.push_back({"m" + std::to_string(i), 1.0});
  try {
    fuse_scores(many, {});
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_EQ(what.rfind("25 utterance", 0), 0u) << what;
    EXPECT_EQ(what.find("m10 "), std::string::npos);
    EXPECT_NE(what.find("..."), std::string::npos);
  }
}

TEST(FuseScores, DuplicatesRejected) {
  const std::vector<ScoreEntry> dup{{"a", 1.0}, {"a", 2.0}};
  const std::vector<ScoreEntry> one{{"a", 1.0}};
  EXPECT_THROW(fuse_scores(dup, one), DataError);
  EXPECT_THROW(fuse_scores(one, dup), DataError);
}

TEST(FuseFiles, WritesFusedTsv) {
  const auto dir = test::scratch_dir("fuse_files");
  std::ofstream(dir / "x.tsv") << "a\t1\nb\t-0.25\n";
  std::ofstream(dir / "w.tsv") << "b\t0.5\na\t-1\n";
  fuse_files(dir / "x.tsv", dir / "w.tsv", dir / "f.tsv");
  std::ifstream in(dir / "f.tsv");
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "a\t1\nb\t0.5\n");
  EXPECT_THROW(fuse_files(dir / "x.tsv", dir / "absent.tsv", dir / "g.tsv"), DataError);
}

}  // namespace
}  // namespace sls
