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

// Linear response-time model RspT = m + k * RUT: ordinary least squares
// fitting, prediction with a pointwise confidence band, goodness of fit and
// validation against the published simulator studies.

#ifndef RESPONSE_TIMING_RESPONSE_MODEL_H_
#define RESPONSE_TIMING_RESPONSE_MODEL_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/table1.h"

namespace response_timing {

// Published coefficients of the linear model.
inline constexpr double kPublishedSlope = 0.47;
inline constexpr double kPublishedIntercept = 0.63;
// Situation-independent "canonical" response time used as a baseline.
inline constexpr double kCanonicalResponseTime = 1.25;
// Goodness of fit stated alongside the published validation.
inline constexpr double kPublishedValidationR2 = 0.62;

struct LinearRspModel {
  double k = kPublishedSlope;
  double m = kPublishedIntercept;
  int n = 0;  // 0 when the coefficients were not fitted here
  double residual_se = 0.0;
  // Retained for the pointwise confidence band.
  double rut_mean = 0.0;
  double sxx = 0.0;

  static LinearRspModel Published() { return {}; }
  static LinearRspModel Constant(double value) {
    LinearRspModel model;
    model.k = 0.0;
    model.m = value;
    return model;
  }
};

struct RutRspPoint {
  double rut = 0.0;
  double rsp_t = 0.0;
};

// Errors: DegenerateDesign when fewer than two distinct RUT values.
absl::StatusOr<LinearRspModel> FitOls(std::span<const RutRspPoint> points);

// m + k * rut. Errors: NegativeRut.
absl::StatusOr<double> Predict(const LinearRspModel& model, double rut);

// Pointwise 95% confidence interval of the fitted mean at `rut`.
// Requires a fitted model with n > 2.
absl::StatusOr<std::pair<double, double>> ConfidenceBand(
    const LinearRspModel& model, double rut, double level = 0.95);

// 1 - sum (p - o)^2 / sum (o - mean(o))^2, unclamped.
// Errors: LengthMismatch, ZeroVariance.
absl::StatusOr<double> RSquared(std::span<const double> observed,
                                std::span<const double> predicted);

// Errors: LengthMismatch, ZeroVariance.
absl::StatusOr<double> Pearson(std::span<const double> x,
                               std::span<const double> y);

struct ValidationRow {
  std::string study_id;
  double rut = 0.0;
  double observed_mean_rsp_t = 0.0;
  double predicted_rsp_t = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double r_squared = 0.0;
  double max_abs_err = 0.0;
};

// Rows from the published table, with the tabulated RUTs.
std::vector<ValidationRow> Table1ValidationRows();

// Recomputes each row's prediction from `model` and scores it against the
// observed means.
absl::StatusOr<ValidationReport> ValidateTable1(
    const LinearRspModel& model, std::vector<ValidationRow> rows);

nlohmann::json ModelJson(const LinearRspModel& model);
absl::StatusOr<LinearRspModel> ParseModelJson(const nlohmann::json& j);
nlohmann::json ValidationReportJson(const ValidationReport& report);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_RESPONSE_MODEL_H_
