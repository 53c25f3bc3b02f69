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

#include <algorithm>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sls/error.hpp"
#include "sls/head_io.hpp"
#include "sls/sls_head.hpp"

namespace sls {
namespace {

using test::plain;
using test::random_params;
using test::random_stack;

// Gradient checks compare against central differences with this step.
constexpr double kStep = 1e-4;
constexpr double kGradTolerance = 1e-5;
// Only guards against 0/0; the check is purely relative.
constexpr double kGradFloor = 1e-300;

HiddenStack constant_stack(std::uint32_t L, std::uint32_t N, std::uint32_t D,
                           float value) {
  return HiddenStack("c", L, N, D, std::vector<float>(std::size_t{L} * N * D, value));
}

TEST(SlsHead, AllOnesGivesScoreOneAndEvenWeights) {
  const auto stack = constant_stack(3, 4, 2, 1.0f);
  auto p = SlsParams<double>::zeros(2);
  p.out_weight.setConstant(1.0);
  p.out_bias = -2.0;
  // alpha = 0.5 per layer, mixed = 1.5, score = 2 * 1.5 - 2
  const auto r = sls_forward(stack, p);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  for (int l = 0; l < 3; ++l) EXPECT_EQ(r.cache.layer_weights(l), 0.5);
}

TEST(SlsHead, TwoOnesLayersWithAveragingReadout) {
  const auto stack = constant_stack(2, 3, 4, 1.0f);
  auto p = SlsParams<double>::zeros(4);
  p.out_weight.setConstant(0.25);
  const auto r = sls_forward(stack, p);
  EXPECT_EQ(r.cache.layer_weights(0), 0.5);
  EXPECT_EQ(r.cache.layer_weights(1), 0.5);
  EXPECT_EQ(r.cache.mixed, Eigen::MatrixXd::Ones(3, 4));
  EXPECT_DOUBLE_EQ(r.score, 1.0);
}

TEST(SlsHead, SingleSaturatedLayerIsFrameMax) {
  Rng rng(21);
  const auto stack = random_stack(1, 7, 5, rng);
  auto p = random_params(5, rng);
  p.gate_weight.setZero();
  p.gate_bias = 20.0;
  const auto r = sls_forward(stack, p);
  EXPECT_NEAR(r.cache.layer_weights(0), 1.0, 1e-8);
  double expected = p.out_bias;
  for (int d = 0; d < 5; ++d)
    expected += p.out_weight(d) * stack.layer(0).col(d).maxCoeff();
  EXPECT_LT(test::relative_error(r.score, expected, 1e-300), 1e-7);
}

TEST(SlsHead, GateSaturatesToPlainSum) {
  Rng rng(5);
  const auto stack = random_stack(4, 6, 3, rng);
  auto p = random_params(3, rng);
  p.gate_weight.setZero();
  p.gate_bias = 40.0;
  double expected = p.out_bias;
  for (int d = 0; d < 3; ++d) {
    double best = -1e300;
    for (int n = 0; n < 6; ++n) {
      double sum = 0.0;
      for (std::uint32_t l = 0; l < 4; ++l) sum += stack.layer(l)(n, d);
      best = std::max(best, sum);
    }
    expected += p.out_weight(d) * best;
  }
  EXPECT_NEAR(sls_score(stack, p), expected, 1e-12);
}

TEST(SlsHead, FrozenReferenceValue) {
  Rng rng(123);
  const auto stack = random_stack(3, 5, 4, rng);
  const auto p = random_params(4, rng);
  const auto r = sls_forward(stack, p);
  EXPECT_NEAR(r.score, 0.4232396125684296, 1e-12);
  EXPECT_NEAR(r.cache.layer_weights(0), 0.44944892680027065, 1e-12);
  EXPECT_NEAR(r.cache.layer_weights(1), 0.46844601018333765, 1e-12);
  EXPECT_NEAR(r.cache.layer_weights(2), 0.25991300607752366, 1e-12);
}

TEST(SlsHead, MatchesLoopOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto L = static_cast<std::uint32_t>(1 + rng.uniform_index(6));
    const auto N = static_cast<std::uint32_t>(1 + rng.uniform_index(8));
    const auto D = static_cast<std::uint32_t>(1 + rng.uniform_index(10));
    const auto stack = random_stack(L, N, D, rng);
    const auto p = random_params(D, rng);
    std::vector<double> alpha;
    const double expected = oracle::head_score(stack, plain(p), &alpha);
    const auto r = sls_forward(stack, p);
    EXPECT_NEAR(r.score, expected, 1e-12);
    for (std::uint32_t l = 0; l < L; ++l)
      EXPECT_NEAR(r.cache.layer_weights(l), alpha[l], 1e-14);
  }
}

TEST(SlsHead, FloatInstantiationTracksDouble) {
  Rng rng(8);
  const auto stack = random_stack(4, 5, 6, rng);
  const auto p = random_params(6, rng);
  EXPECT_NEAR(sls_score(stack, p.cast<float>()), sls_score(stack, p), 1e-5);
}

TEST(SlsHead, FramePermutationInvariance) {
  Rng rng(31);
  const auto stack = random_stack(3, 7, 5, rng);
  const auto p = random_params(5, rng);
  std::vector<std::uint32_t> order(7);
  std::iota(order.begin(), order.end(), 0u);
  std::reverse(order.begin(), order.end());
  std::swap(order[1], order[4]);
  std::vector<float> shuffled;
  for (std::uint32_t l = 0; l < 3; ++l)
    for (auto n : order)
      for (std::uint32_t d = 0; d < 5; ++d) shuffled.push_back(stack.layer(l)(n, d));
  const HiddenStack permuted("p", 3, 7, 5, std::move(shuffled));
  EXPECT_NEAR(sls_score(permuted, p), sls_score(stack, p), 1e-12);
}

TEST(SlsHead, LayerWeightsRiseWithGateBias) {
  Rng rng(4);
  const auto stack = random_stack(5, 4, 3, rng);
  auto p = random_params(3, rng);
  auto prev = layer_weights(stack, p);
  for (int step = 0; step < 20; ++step) {
    p.gate_bias += 0.5;
    const auto next = layer_weights(stack, p);
    for (int l = 0; l < 5; ++l) EXPECT_GT(next(l), prev(l));
    prev = next;
  }
}

TEST(SlsHead, TiesPickLowestFrame) {
  const HiddenStack stack("t", 1, 3, 2, {1, 0, 5, 0, 5, 0});
  auto p = SlsParams<double>::zeros(2);
  p.out_weight << 1.0, 1.0;
  const auto r = sls_forward(stack, p);
  EXPECT_EQ(r.cache.argmax[0], 1);
  EXPECT_EQ(r.cache.argmax[1], 0);
}

TEST(SlsHead, LayerWeightsAreThoseOfTheForwardPass) {
  Rng rng(9);
  const auto stack = random_stack(6, 3, 4, rng);
  const auto p = random_params(4, rng);
  const auto r = sls_forward(stack, p);
  const auto w = layer_weights(stack, p);
  ASSERT_EQ(w.size(), 6);
  for (int l = 0; l < 6; ++l) EXPECT_EQ(w(l), r.cache.layer_weights(l));
  const auto zero_gate = layer_weights(stack, SlsParams<double>::zeros(4));
  for (int l = 0; l < 6; ++l) EXPECT_EQ(zero_gate(l), 0.5);
}

TEST(SlsHead, DimensionMismatchNamesBothSizes) {
  Rng rng(1);
  const auto stack = random_stack(2, 2, 5, rng, "mismatch");
  try {
    sls_score(stack, SlsParams<double>::zeros(4));
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("D=5"), std::string::npos) << what;
    EXPECT_NE(what.find("D=4"), std::string::npos) << what;
  }
}

TEST(SlsHead, InitIsSeededAndBounded) {
  Rng a(3), b(3);
  const auto p = init_params<double>(16, a);
  EXPECT_EQ(p, init_params<double>(16, b));
  EXPECT_LE(p.gate_weight.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_EQ(p.out_weight.squaredNorm(), 0.0);
}

TEST(SlsHead, FlattenOrderAndRoundTrip) {
  Rng rng(2);
  const auto p = random_params(3, rng);
  const auto flat = p.flatten();
  ASSERT_EQ(flat.size(), 8);
  EXPECT_EQ(flat(3), p.gate_bias);
  EXPECT_EQ(flat(4), p.out_weight(0));
  EXPECT_EQ(flat(7), p.out_bias);
  EXPECT_EQ(SlsParams<double>::unflatten(flat), p);
}

TEST(SlsBackward, ZeroUpstreamGivesZeroGradient) {
  Rng rng(10);
  const auto stack = random_stack(3, 4, 5, rng);
  const auto p = random_params(5, rng);
  const auto g = sls_backward(sls_forward(stack, p).cache, 0.0);
  EXPECT_EQ(g.flatten().cwiseAbs().maxCoeff(), 0.0);
}

TEST(SlsBackward, OutputBiasGradientIsUpstream) {
  Rng rng(11);
  const auto stack = random_stack(2, 3, 4, rng);
  const auto p = random_params(4, rng);
  const auto cache = sls_forward(stack, p).cache;
  for (double u : {1.0, -0.25, 3.5}) EXPECT_EQ(sls_backward(cache, u).out_bias, u);
}

TEST(SlsBackward, UpstreamScalesLinearly) {
  Rng rng(12);
  const auto stack = random_stack(3, 3, 3, rng);
  const auto p = random_params(3, rng);
  const auto cache = sls_forward(stack, p).cache;
  const auto one = sls_backward(cache, 1.0).flatten();
  const auto three = sls_backward(cache, 3.0).flatten();
  EXPECT_LT((three - 3.0 * one).cwiseAbs().maxCoeff(), 1e-12);
}

double worst_gradient_error(std::uint32_t L, std::uint32_t N, std::uint32_t D,
                            std::uint64_t seed) {
  Rng rng(seed);
  const auto stack = random_stack(L, N, D, rng);
  const auto p = random_params(D, rng);
  const auto analytic = sls_backward(sls_forward(stack, p).cache, 1.0).flatten();
  const auto numeric = oracle::central_difference(
      [&](const std::vector<double>& x) {
        return oracle::head_score(stack, test::plain_from_flat(x));
      },
      test::flat(p), kStep);
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    worst = std::max(worst, test::relative_error(analytic(static_cast<Eigen::Index>(i)),
                                                 numeric[i], kGradFloor));
  return worst;
}

TEST(SlsBackward, MatchesCentralDifferencesOnGrid) {
  for (std::uint32_t L : {1u, 4u, 25u})
    for (std::uint32_t N : {1u, 3u, 10u})
      for (std::uint32_t D : {1u, 8u, 16u})
        for (std::uint64_t seed = 0; seed < 20; ++seed)
          EXPECT_LT(worst_gradient_error(L, N, D, seed), kGradTolerance)
              << "L=" << L << " N=" << N << " D=" << D << " seed=" << seed;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(6);
  for (std::uint32_t d : {1u, 7u, 1024u}) {
    const auto p = random_params(d, rng);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_checkpoint(p, buf);
    EXPECT_EQ(buf.str().size(), 4u + 2 + 4 + 8 * (2 * d + 2));
    EXPECT_EQ(read_checkpoint(buf), p);
  }
}

std::string checkpoint_error(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    read_checkpoint(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(SlsParams<double>::zeros(2), out);
  const std::string good = out.str();
  EXPECT_EQ(checkpoint_error(good), "");

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(checkpoint_error(bad), "not an SLSP checkpoint");
  bad = good;
  bad[4] = 9;
  EXPECT_NE(checkpoint_error(bad).find("unsupported checkpoint version"), std::string::npos);
  EXPECT_FALSE(checkpoint_error(good.substr(0, good.size() - 1)).empty());
  EXPECT_NE(checkpoint_error(good + "z").find("trailing"), std::string::npos);
  bad = good;
  for (int i = 0; i < 8; ++i) bad[10 + i] = static_cast<char>(0xFF);  // NaN
  EXPECT_NE(checkpoint_error(bad).find("corrupt"), std::string::npos);
}

TEST(Checkpoint, FileErrorsCarryPath) {
  const auto dir = test::scratch_dir("ckpt");
  const auto path = dir / "head.slsp";
  write_checkpoint_file(SlsParams<double>::zeros(3), path);
  EXPECT_EQ(read_checkpoint_file(path), SlsParams<double>::zeros(3));
  try {
    read_checkpoint_file(dir / "absent.slsp");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.slsp"), std::string::npos);
  }
}

TEST(LayerWeightsCsv, HeaderAndRows) {
  std::ostringstream out;
  Eigen::VectorXd w(2);
  w << 0.5, 0.25;
  write_layer_weights_csv({{"a", w}, {"b", w}}, out);
  EXPECT_EQ(out.str(), "utterance_id,layer_0,layer_1\na,0.5,0.25\nb,0.5,0.25\n");
  Eigen::VectorXd three(3);
  three.setZero();
  std::ostringstream sink;
  EXPECT_THROW(write_layer_weights_csv({{"a", w}, {"b", three}}, sink), DataError);
}

}  // namespace
}  // namespace sls
