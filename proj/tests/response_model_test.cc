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

#include "response_timing/response_model.h"

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace response_timing {
namespace {

using ::testing::HasSubstr;

TEST(FitOlsTest, ExactLine) {
  std::vector<RutRspPoint> pts = {{0.0, 0.63}, {1.0, 1.10}, {2.0, 1.57},
                                  {4.0, 2.51}};
  absl::StatusOr<LinearRspModel> m = FitOls(pts);
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_NEAR(m->k, 0.47, 1e-12);
  EXPECT_NEAR(m->m, 0.63, 1e-12);
  EXPECT_NEAR(m->residual_se, 0.0, 1e-12);
  EXPECT_EQ(m->n, 4);
}

TEST(FitOlsTest, ShiftEquivariance) {
  std::vector<RutRspPoint> pts = {{0.5, 1.0}, {1.5, 1.9}, {2.0, 1.7},
                                  {3.5, 2.6}, {4.0, 2.4}};
  LinearRspModel base = *FitOls(pts);
  for (auto& p : pts) p.rsp_t += 0.25;
  LinearRspModel shifted = *FitOls(pts);
  EXPECT_NEAR(shifted.k, base.k, 1e-12);
  EXPECT_NEAR(shifted.m, base.m + 0.25, 1e-12);
}

TEST(FitOlsTest, RecoversNoisyLine) {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> rut(0.0, 5.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<RutRspPoint> pts;
    for (int i = 0; i < 200; ++i) {
      const double x = rut(rng);
      pts.push_back({x, 0.63 + 0.47 * x + noise(rng)});
    }
    LinearRspModel m = *FitOls(pts);
    EXPECT_NEAR(m.k, 0.47, 0.02) << seed;
    EXPECT_NEAR(m.m, 0.63, 0.03) << seed;

    double resid_sum = 0.0, resid_dot_x = 0.0;
    for (const auto& p : pts) {
      const double r = p.rsp_t - *Predict(m, p.rut);
      resid_sum += r;
      resid_dot_x += r * p.rut;
    }
    EXPECT_NEAR(resid_sum, 0.0, 1e-9);
    EXPECT_NEAR(resid_dot_x, 0.0, 1e-9);
  }
}

TEST(FitOlsTest, DegenerateInputs) {
  std::vector<RutRspPoint> one = {{1.0, 1.0}};
  EXPECT_FALSE(FitOls(one).ok());
  std::vector<RutRspPoint> flat = {{2.0, 1.0}, {2.0, 1.5}, {2.0, 0.9}};
  absl::StatusOr<LinearRspModel> m = FitOls(flat);
  ASSERT_FALSE(m.ok());
  EXPECT_THAT(m.status().message(), HasSubstr("DegenerateDesign"));
}

TEST(PredictTest, PublishedModelIsAffine) {
  const LinearRspModel m = LinearRspModel::Published();
  EXPECT_NEAR(*Predict(m, 0.0), 0.63, 1e-12);
  EXPECT_NEAR(*Predict(m, 2.0), 1.57, 1e-12);
  const double a = 0.3, b = 4.1, w = 0.35;
  EXPECT_NEAR(*Predict(m, w * a + (1 - w) * b),
              w * *Predict(m, a) + (1 - w) * *Predict(m, b), 1e-12);
  absl::StatusOr<double> neg = Predict(m, -0.1);
  ASSERT_FALSE(neg.ok());
  EXPECT_THAT(neg.status().message(), HasSubstr("NegativeRut"));
}

TEST(RSquaredTest, Cases) {
  std::vector<double> obs = {1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(*RSquared(obs, obs), 1.0);
  std::vector<double> mean(4, 2.5);
  EXPECT_NEAR(*RSquared(obs, mean), 0.0, 1e-15);
  std::vector<double> bad = {4.0, 3.0, 2.0, 1.0};
  EXPECT_LT(*RSquared(obs, bad), 0.0);
  std::vector<double> short_pred = {1.0};
  EXPECT_FALSE(RSquared(obs, short_pred).ok());
  std::vector<double> flat(4, 1.0);
  EXPECT_FALSE(RSquared(flat, obs).ok());
}

TEST(RSquaredTest, Table1PrintedColumns) {
  const std::vector<double> observed = {2.18, 3.16, 1.82, 1.04};
  const std::vector<double> predicted = {1.87, 2.36, 2.02, 0.94};
  const double mean = (2.18 + 3.16 + 1.82 + 1.04) / 4.0;
  double res = 0.0, tot = 0.0;
  for (size_t i = 0; i < 4; ++i) {
    res += std::pow(predicted[i] - observed[i], 2);
    tot += std::pow(observed[i] - mean, 2);
  }
  EXPECT_NEAR(*RSquared(observed, predicted), 1.0 - res / tot, 1e-12);
  EXPECT_NEAR(*RSquared(observed, predicted), 0.6614, 1e-4);
}

TEST(PearsonTest, Cases) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> up = {2, 4, 6, 8, 10};
  std::vector<double> down = {5, 4, 3, 2, 1};
  EXPECT_NEAR(*Pearson(x, up), 1.0, 1e-15);
  EXPECT_NEAR(*Pearson(x, down), -1.0, 1e-15);
  std::vector<double> flat(5, 3.0);
  EXPECT_FALSE(Pearson(x, flat).ok());

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::vector<double> a, b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(n01(rng));
    b.push_back(n01(rng));
  }
  EXPECT_LT(std::abs(*Pearson(a, b)), 0.05);
}

TEST(ValidationTest, PublishedModelOnTable1) {
  absl::StatusOr<ValidationReport> r =
      ValidateTable1(LinearRspModel::Published(), Table1ValidationRows());
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_EQ(r->rows.size(), 4u);
  const double pred[] = {1.87, 2.36, 2.02, 0.94};
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r->rows[i].predicted_rsp_t, pred[i], 0.05);
  }
  EXPECT_GT(r->r_squared, 0.5);
  EXPECT_NEAR(r->max_abs_err,
              std::abs(0.63 + 0.47 * 3.6 - 3.16), 1e-12);
}

TEST(ValidationTest, CanonicalBaselineFitsWorse) {
  ValidationReport canonical =
      *ValidateTable1(LinearRspModel::Constant(kCanonicalResponseTime),
                      Table1ValidationRows());
  ValidationReport published =
      *ValidateTable1(LinearRspModel::Published(), Table1ValidationRows());
  EXPECT_LT(canonical.r_squared, 0.0);
  EXPECT_LT(canonical.r_squared, published.r_squared);
  for (const auto& row : canonical.rows) {
    EXPECT_DOUBLE_EQ(row.predicted_rsp_t, 1.25);
  }
}

TEST(ConfidenceBandTest, MatchesManualStudentT) {
  std::vector<RutRspPoint> pts = {{0.5, 0.9}, {1.0, 1.2}, {2.0, 1.5},
                                  {3.0, 2.1}, {4.0, 2.4}, {5.0, 3.0}};
  LinearRspModel m = *FitOls(pts);
  const double x = 2.7;
  absl::StatusOr<std::pair<double, double>> band = ConfidenceBand(m, x, 0.95);
  ASSERT_TRUE(band.ok()) << band.status();

  double mx = 0.0;
  for (const auto& p : pts) mx += p.rut;
  mx /= 6.0;
  double sxx = 0.0, sse = 0.0;
  for (const auto& p : pts) {
    sxx += (p.rut - mx) * (p.rut - mx);
    sse += std::pow(p.rsp_t - (m.m + m.k * p.rut), 2);
  }
  const double t = boost::math::quantile(boost::math::students_t(4), 0.975);
  const double half =
      t * std::sqrt(sse / 4.0) * std::sqrt(1.0 / 6.0 + (x - mx) * (x - mx) / sxx);
  EXPECT_NEAR(band->first, m.m + m.k * x - half, 1e-12);
  EXPECT_NEAR(band->second, m.m + m.k * x + half, 1e-12);

  EXPECT_FALSE(ConfidenceBand(LinearRspModel::Published(), 1.0).ok());
  EXPECT_FALSE(ConfidenceBand(m, 1.0, 1.5).ok());
}

TEST(ModelJsonTest, RoundTrip) {
  std::vector<RutRspPoint> pts = {{0.5, 0.9}, {1.0, 1.2}, {2.0, 1.5}};
  LinearRspModel m = *FitOls(pts);
  absl::StatusOr<LinearRspModel> back = ParseModelJson(ModelJson(m));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(ModelJson(*back), ModelJson(m));
  EXPECT_FALSE(ParseModelJson(nlohmann::json{{"k", 1.0}}).ok());
}

}  // namespace
}  // namespace response_timing
