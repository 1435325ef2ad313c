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

#include "response_timing/looming.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "gtest/gtest.h"

namespace response_timing {
namespace {

std::vector<double> Sampled(double t0, double dt, size_t n,
                            double (*f)(double)) {
  std::vector<double> out;
  for (size_t i = 0; i < n; ++i) out.push_back(f(t0 + i * dt));
  return out;
}

// Closing rear-end geometry: range r(t) = 40 - 6 t - 0.5 t^2.
double Range(double t) { return 40.0 - 6.0 * t - 0.5 * t * t; }
double Closing(double t) { return 6.0 + t; }
constexpr double kWidth = 1.8;

KinematicTrace ClosingTrace(double dt, double duration) {
  KinematicTrace trace;
  trace.dt = dt;
  trace.pov_width = kWidth;
  const size_t n = static_cast<size_t>(std::round(duration / dt)) + 1;
  for (size_t i = 0; i < n; ++i) {
    const double t = i * dt;
    trace.sv.push_back({6.0 * t + 0.5 * t * t, 0, 6.0 + t, 1.0, 0});
    trace.pov.push_back({40.0, 0, 0, 0, 0});
    trace.flags.brake_light_on.push_back(false);
    trace.flags.occluded.push_back(false);
  }
  return trace;
}

TEST(ThetaFromPixelsTest, UnitRatioGivesArctanHalf) {
  absl::StatusOr<double> th = ThetaFromPixels(2.5);
  ASSERT_TRUE(th.ok());
  EXPECT_NEAR(*th, 2.0 * std::atan(0.5), 1e-12);
  EXPECT_NEAR(*th, 0.92730, 1e-5);
  EXPECT_DOUBLE_EQ(*ThetaFromPixels(0.0), 0.0);
  EXPECT_FALSE(ThetaFromPixels(-1.0).ok());
}

TEST(ThetaFromPixelsTest, MonotoneTowardPi) {
  double prev = 0.0;
  for (double w : {1.0, 10.0, 100.0, 1e4, 1e7}) {
    const double th = *ThetaFromPixels(w);
    EXPECT_GT(th, prev);
    EXPECT_LT(th, std::numbers::pi);
    prev = th;
  }
  EXPECT_NEAR(prev, std::numbers::pi, 1e-5);
}

TEST(ThetaFromGeometryTest, AnalyticValues) {
  EXPECT_NEAR(*ThetaFromGeometry(1.8, 18.0), 0.099917, 1e-6);
  EXPECT_NEAR(*ThetaFromGeometry(4.0, 2.0), std::numbers::pi / 2, 1e-12);
  EXPECT_LT(*ThetaFromGeometry(1.8, 1e9), 1e-8);
  EXPECT_FALSE(ThetaFromGeometry(1.8, 0.0).ok());
  EXPECT_FALSE(ThetaFromGeometry(1.8, -3.0).ok());
}

TEST(ThetaFromGeometryTest, MonotoneInRangeAndWidth) {
  for (double r = 1.0; r < 100.0; r *= 1.7) {
    EXPECT_GT(*ThetaFromGeometry(1.8, r), *ThetaFromGeometry(1.8, r * 1.01));
    EXPECT_LT(*ThetaFromGeometry(1.8, r), *ThetaFromGeometry(1.9, r));
  }
}

TEST(ThetaDotSeriesTest, ExactOnLinear) {
  std::vector<double> theta;
  for (int i = 0; i < 30; ++i) theta.push_back(0.01 * i * 0.1);
  absl::StatusOr<std::vector<double>> rate = ThetaDotSeries(theta, 0.1);
  ASSERT_TRUE(rate.ok());
  for (double r : *rate) EXPECT_NEAR(r, 0.01, 1e-12);
}

TEST(ThetaDotSeriesTest, ConstantIsZero) {
  std::vector<double> theta(12, 0.3);
  std::vector<double> rate = *ThetaDotSeries(theta, 0.1, 5);
  for (double r : rate) EXPECT_EQ(r, 0.0);
}

TEST(ThetaDotSeriesTest, CentralDifferenceExactOnQuadratic) {
  const double dt = 0.01;
  std::vector<double> theta;
  for (int i = 0; i <= 200; ++i) theta.push_back(0.005 * (i * dt) * (i * dt));
  std::vector<double> rate = *ThetaDotSeries(theta, dt);
  EXPECT_NEAR(rate[100], 0.01, 1e-6);
}

TEST(ThetaDotSeriesTest, ErrorsAndSmoothingWindow) {
  std::vector<double> two = {0.0, 1.0};
  EXPECT_FALSE(ThetaDotSeries(two, 0.1).ok());
  std::vector<double> many(10, 0.0);
  EXPECT_FALSE(ThetaDotSeries(many, 0.1, 2).ok());
  std::vector<double> spike(11, 0.0);
  spike[5] = 1.0;
  std::vector<double> smooth = *ThetaDotSeries(spike, 1.0, 3);
  std::vector<double> raw = *ThetaDotSeries(spike, 1.0, 1);
  EXPECT_NEAR(smooth[5], (raw[4] + raw[5] + raw[6]) / 3.0, 1e-15);
  EXPECT_EQ(smooth[0], raw[0]);
}

TEST(FirstCrossingTest, LinearRamp) {
  std::vector<double> ramp;
  for (int i = 0; i <= 20; ++i) ramp.push_back(0.005 * i);  // 0 -> 0.1 in 2 s
  std::optional<double> t = FirstCrossing(ramp, 0.0, 0.1, 0.05, 0.0);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 1.0, 1e-12);
}

TEST(FirstCrossingTest, AlreadyAboveReturnsFromT) {
  std::vector<double> s(10, 0.2);
  EXPECT_DOUBLE_EQ(*FirstCrossing(s, 0.0, 0.1, 0.05, 0.33), 0.33);
}

TEST(FirstCrossingTest, NeverReachedIsAbsent) {
  std::vector<double> s(10, 0.04);
  EXPECT_FALSE(FirstCrossing(s, 0.0, 0.1, 0.05, 0.0).has_value());
}

TEST(FirstCrossingTest, MonotoneInThreshold) {
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(0.001 * i * i / 100.0 + 0.0001 * i);
  double prev = -1.0;
  for (double th = 0.001; th < 0.1; th += 0.003) {
    std::optional<double> t = FirstCrossing(s, 0.0, 0.1, th, 0.0);
    if (!t) break;
    EXPECT_GE(*t, prev);
    prev = *t;
  }
}

TEST(ComputeLoomingTest, MatchesAnalyticRate) {
  const double dt = 0.01;
  absl::StatusOr<LoomingSignal> sig = ComputeLooming(ClosingTrace(dt, 3.0));
  ASSERT_TRUE(sig.ok());
  for (size_t i = 1; i + 1 < sig->size(); ++i) {
    const double t = sig->TimeAt(i);
    const double r = Range(t);
    const double analytic = kWidth * Closing(t) / (r * r + kWidth * kWidth / 4);
    EXPECT_NEAR(sig->theta_dot[i], analytic, 1e-4) << "t = " << t;
  }
}

TEST(ComputeLoomingTest, TauMatchesKinematicTtcAtSmallAngles) {
  absl::StatusOr<LoomingSignal> sig = ComputeLooming(ClosingTrace(0.01, 3.0));
  ASSERT_TRUE(sig.ok());
  int checked = 0;
  for (size_t i = 1; i + 1 < sig->size(); ++i) {
    if (sig->theta[i] >= 0.1) continue;
    const double t = sig->TimeAt(i);
    ASSERT_TRUE(sig->tau[i].has_value());
    const double ttc = Range(t) / Closing(t);
    EXPECT_NEAR(*sig->tau[i], ttc, 0.05 * ttc);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(ComputeLoomingTest, StopsBeforeContact) {
  KinematicTrace trace = ClosingTrace(0.1, 10.0);
  absl::StatusOr<LoomingSignal> sig = ComputeLooming(trace);
  ASSERT_TRUE(sig.ok());
  EXPECT_LT(sig->size(), trace.size());
  EXPECT_GT(Range(sig->EndTime()), 0.0);
}

TEST(LoomingCsvTest, RoundTripWithAbsentTau) {
  LoomingSignal sig = LoomingFromTheta({0.1, 0.1, 0.11, 0.13}, 2.0, 0.5,
                                       {0.0, 0.02, 0.03, 0.04});
  EXPECT_FALSE(sig.tau[0].has_value());
  absl::StatusOr<LoomingSignal> back = ParseLoomingCsv(FormatLoomingCsv(sig));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_DOUBLE_EQ(back->t0, 2.0);
  EXPECT_DOUBLE_EQ(back->dt, 0.5);
  EXPECT_FALSE(back->tau[0].has_value());
  EXPECT_DOUBLE_EQ(*back->tau[3], 0.13 / 0.04);
  EXPECT_EQ(back->theta_dot, sig.theta_dot);
}

}  // namespace
}  // namespace response_timing
