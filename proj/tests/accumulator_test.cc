/* Copyright 2026 The Response Timing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "response_timing/accumulator.h"

#include <cmath>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace response_timing {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

SurpriseSeries Constant(double value, double span, double dt = 0.01) {
  SurpriseSeries s;
  s.dt = dt;
  s.s.assign(static_cast<size_t>(std::round(span / dt)) + 1, value);
  return s;
}

AccumulatorParams Params(double k, double lambda, double sigma = 0.0) {
  AccumulatorParams p;
  p.k = k;
  p.lambda = lambda;
  p.noise_sigma = sigma;
  return p;
}

TEST(IntegrateTest, PerfectIntegratorFirstPassage) {
  absl::StatusOr<OnsetResult> r =
      Integrate(Params(1.0, 0.0), Constant(0.5, 5.0), 1, 0.0);
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_TRUE(r->onset_t.has_value());
  EXPECT_NEAR(*r->onset_t, 2.0, 0.001);
  EXPECT_EQ(r->seed, 1u);

  // Baseline is subtracted before integration.
  r = Integrate(Params(1.0, 0.0), Constant(1.5, 5.0), 1, 1.0);
  EXPECT_NEAR(*r->onset_t, 2.0, 0.001);
  // T / (k s) for a few more gains.
  for (double k : {0.5, 2.0, 4.0}) {
    r = Integrate(Params(k, 0.0), Constant(0.5, 10.0), 1, 0.0);
    EXPECT_NEAR(*r->onset_t, 1.0 / (k * 0.5), 0.001) << k;
  }
}

TEST(IntegrateTest, LeakyClosedForm) {
  absl::StatusOr<OnsetResult> r =
      Integrate(Params(1.0, -1.0), Constant(2.0, 3.0), 1, 0.0);
  ASSERT_TRUE(r.ok());
  ASSERT_TRUE(r->onset_t.has_value());
  EXPECT_NEAR(*r->onset_t, std::log(2.0), 0.001);
}

TEST(IntegrateTest, SaturationBelowThresholdNeverFires) {
  absl::StatusOr<OnsetResult> r =
      Integrate(Params(1.0, -1.0), Constant(0.4, 30.0), 1, 0.0);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->onset_t.has_value());
}

TEST(IntegrateTest, DtHalvingConverges) {
  AccumulatorParams coarse = Params(1.0, -1.0);
  coarse.dt = 0.002;
  AccumulatorParams fine = coarse;
  fine.dt = 0.001;
  const SurpriseSeries s = Constant(2.0, 3.0);
  const double a = *Integrate(coarse, s, 1, 0.0)->onset_t;
  const double b = *Integrate(fine, s, 1, 0.0)->onset_t;
  EXPECT_LT(std::abs(a - b), fine.dt);
  EXPECT_LT(std::abs(b - std::log(2.0)), std::abs(a - std::log(2.0)));
}

TEST(IntegrateTest, OnsetMonotoneInGainAndInput) {
  SurpriseSeries s;
  s.dt = 0.01;
  for (int i = 0; i <= 500; ++i) s.s.push_back(0.2 + 0.1 * std::sin(0.05 * i));
  double prev = 1e9;
  for (double k = 0.5; k <= 4.0; k += 0.5) {
    const double t =
        Integrate(Params(k, -0.2), s, 1, 0.0)->onset_t.value_or(1e9);
    EXPECT_LE(t, prev);
    prev = t;
  }
  prev = 1e9;
  for (double scale = 1.0; scale <= 3.0; scale += 0.25) {
    SurpriseSeries scaled = s;
    for (double& v : scaled.s) v *= scale;
    const double t =
        Integrate(Params(1.0, -0.2), scaled, 1, 0.0)->onset_t.value_or(1e9);
    EXPECT_LE(t, prev);
    prev = t;
  }
  EXPECT_LT(prev, 1e9);
}

TEST(IntegrateTest, DeterministicForSeed) {
  const SurpriseSeries s = Constant(0.5, 5.0);
  const AccumulatorParams p = Params(1.0, -0.1, 0.3);
  OnsetResult a = *Integrate(p, s, 42, 0.0, true);
  OnsetResult b = *Integrate(p, s, 42, 0.0, true);
  OnsetResult c = *Integrate(p, s, 43, 0.0, true);
  EXPECT_EQ(a.onset_t, b.onset_t);
  EXPECT_EQ(a.trajectory->a, b.trajectory->a);
  EXPECT_NE(a.trajectory->a, c.trajectory->a);
}

TEST(IntegrateTest, LeakConvergesWithoutClamp) {
  AccumulatorParams p = Params(1.0, -0.5);
  p.threshold = 10.0;
  p.clamp_nonnegative = false;
  absl::StatusOr<OnsetResult> r =
      Integrate(p, Constant(1.0, 25.0), 1, 0.0, true);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->onset_t.has_value());
  const ActivationTrajectory& traj = *r->trajectory;
  const size_t at = static_cast<size_t>(std::round(20.0 / p.dt));
  ASSERT_LT(at, traj.a.size());
  EXPECT_NEAR(traj.a[at], 2.0, 0.02);
}

TEST(IntegrateTest, ClampHoldsActivationAtZero) {
  AccumulatorParams p = Params(1.0, 0.0, 0.5);
  absl::StatusOr<OnsetResult> r =
      Integrate(p, Constant(0.0, 2.0), 7, 0.0, true);
  ASSERT_TRUE(r.ok());
  for (double a : r->trajectory->a) EXPECT_GE(a, 0.0);
}

TEST(IntegrateTest, ErrorsAndValidation) {
  absl::StatusOr<OnsetResult> r =
      Integrate(Params(1.0, 0.0), SurpriseSeries{}, 1, 0.0);
  ASSERT_FALSE(r.ok());
  EXPECT_THAT(r.status().message(), HasSubstr("EmptySeries"));
  AccumulatorParams p;
  p.dt = 0.0;
  EXPECT_FALSE(ValidateParams(p).ok());
  p = AccumulatorParams{};
  p.noise_sigma = -1.0;
  EXPECT_FALSE(ValidateParams(p).ok());
  p = AccumulatorParams{};
  p.a0 = 2.0;
  EXPECT_FALSE(ValidateParams(p).ok());
  EXPECT_TRUE(ValidateParams(AccumulatorParams{}).ok());
}

TEST(DefaultBaselineTest, MedianOfFirstSecond) {
  SurpriseSeries s;
  s.dt = 0.25;
  s.t0 = 2.0;
  s.s = {3.0, 1.0, 2.0, 100.0, 5.0, 50.0, 60.0};
  // Samples at 2.0, 2.25, 2.5, 2.75 and 3.0.
  EXPECT_DOUBLE_EQ(DefaultBaseline(s), 3.0);
  EXPECT_DOUBLE_EQ(DefaultBaseline(s, 0.5), 2.0);
}

TEST(MonteCarloTest, NoiselessRunsAreIdentical) {
  const SurpriseSeries s = Constant(0.5, 5.0);
  absl::StatusOr<MonteCarloResult> mc =
      MonteCarloOnsets(Params(1.0, 0.0), s, 0.0, 50, 9);
  ASSERT_TRUE(mc.ok());
  const double det = *Integrate(Params(1.0, 0.0), s, 0, 0.0)->onset_t;
  for (const auto& o : mc->onsets) EXPECT_EQ(*o, det);
  EXPECT_NEAR(*mc->summary.sd, 0.0, 1e-12);
}

TEST(MonteCarloTest, SmallNoiseIsConsistentWithDeterministicOnset) {
  const SurpriseSeries s = Constant(0.5, 5.0);
  const double det = *Integrate(Params(1.0, 0.0), s, 0, 0.0)->onset_t;
  MonteCarloResult mc =
      *MonteCarloOnsets(Params(1.0, 0.0, 0.01), s, 0.0, 1000, 3);
  ASSERT_EQ(mc.summary.n_responded, 1000);
  EXPECT_GT(*mc.summary.sd, 0.0);
  EXPECT_NEAR(*mc.summary.mean, det, 3.0 * *mc.summary.sd / std::sqrt(1000.0));
}

TEST(MonteCarloTest, NoInputNeverResponds) {
  MonteCarloResult mc = *MonteCarloOnsets(Params(1.0, 0.0, 0.01),
                                          Constant(0.0, 2.0), 0.0, 10000, 5);
  EXPECT_EQ(mc.summary.n, 10000);
  EXPECT_EQ(mc.summary.n_responded, 0);
  EXPECT_DOUBLE_EQ(mc.summary.p_no_response, 1.0);
  EXPECT_FALSE(mc.summary.mean.has_value());
}

TEST(MonteCarloTest, ThreadCountDoesNotChangeResults) {
  const SurpriseSeries s = Constant(0.6, 5.0);
  const AccumulatorParams p = Params(1.0, -0.2, 0.4);
  MonteCarloResult one = *MonteCarloOnsets(p, s, 0.0, 200, 17, 1);
  MonteCarloResult four = *MonteCarloOnsets(p, s, 0.0, 200, 17, 4);
  EXPECT_EQ(one.onsets, four.onsets);
  EXPECT_FALSE(MonteCarloOnsets(p, s, 0.0, 0, 17).ok());
}

TEST(SummarizeTest, QuantilesAndNonResponse) {
  OnsetSummary sum = Summarize({1.0, 2.0, std::nullopt, 3.0, 4.0});
  EXPECT_EQ(sum.n, 5);
  EXPECT_EQ(sum.n_responded, 4);
  EXPECT_DOUBLE_EQ(sum.p_no_response, 0.2);
  EXPECT_DOUBLE_EQ(*sum.mean, 2.5);
  EXPECT_NEAR(*sum.sd, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(*sum.q10, 1.3, 1e-12);
  EXPECT_NEAR(*sum.q50, 2.5, 1e-12);
  EXPECT_NEAR(*sum.q90, 3.7, 1e-12);
}

TEST(AccumulatorIoTest, JsonAndTrajectory) {
  AccumulatorParams p = Params(1.5, -0.25, 0.05);
  p.clamp_nonnegative = false;
  absl::StatusOr<AccumulatorParams> back =
      ParseAccumulatorParamsJson(AccumulatorParamsJson(p));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(AccumulatorParamsJson(*back), AccumulatorParamsJson(p));
  EXPECT_FALSE(
      ParseAccumulatorParamsJson(nlohmann::json{{"dt", -1.0}}).ok());

  OnsetResult r = *Integrate(Params(1.0, 0.0), Constant(0.5, 3.0), 1, 0.0, true);
  EXPECT_THAT(FormatTrajectoryCsv(*r.trajectory), StartsWith("t,A\n0,0\n"));
  nlohmann::json j = OnsetJson(r, 0.25);
  EXPECT_NEAR(j.at("onset_t").get<double>(), 2.0, 0.001);
  EXPECT_DOUBLE_EQ(j.at("baseline").get<double>(), 0.25);
}

}  // namespace
}  // namespace response_timing
