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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "absl/strings/str_cat.h"

namespace response_timing {
namespace {

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

absl::Status CheckLengths(size_t a, size_t b) {
  if (a != b) {
    return absl::InvalidArgumentError(
        absl::StrCat("LengthMismatch: ", a, " vs ", b));
  }
  if (a == 0) return absl::InvalidArgumentError("LengthMismatch: empty input");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<LinearRspModel> FitOls(std::span<const RutRspPoint> points) {
  const size_t n = points.size();
  if (n < 2) {
    return absl::InvalidArgumentError(
        "DegenerateDesign: at least two points required");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.rut;
    my += p.rsp_t;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.rut - mx) * (p.rut - mx);
    sxy += (p.rut - mx) * (p.rsp_t - my);
  }
  if (!(sxx > 0.0)) {
    return absl::InvalidArgumentError(
        "DegenerateDesign: all RUT values are equal");
  }
  LinearRspModel model;
  model.k = sxy / sxx;
  model.m = my - model.k * mx;
  model.n = static_cast<int>(n);
  model.rut_mean = mx;
  model.sxx = sxx;
  double sse = 0.0;
  for (const auto& p : points) {
    const double r = p.rsp_t - (model.m + model.k * p.rut);
    sse += r * r;
  }
  model.residual_se =
      n > 2 ? std::sqrt(sse / static_cast<double>(n - 2)) : 0.0;
  return model;
}

absl::StatusOr<double> Predict(const LinearRspModel& model, double rut) {
  if (rut < 0.0) {
    return absl::InvalidArgumentError(absl::StrCat("NegativeRut: ", rut));
  }
  return model.m + model.k * rut;
}

absl::StatusOr<std::pair<double, double>> ConfidenceBand(
    const LinearRspModel& model, double rut, double level) {
  if (model.n <= 2 || !(model.sxx > 0.0)) {
    return absl::FailedPreconditionError(
        "confidence band needs a model fitted on more than two points");
  }
  if (!(level > 0.0 && level < 1.0)) {
    return absl::InvalidArgumentError("level must lie in (0, 1)");
  }
  absl::StatusOr<double> center = Predict(model, rut);
  if (!center.ok()) return center.status();
  const boost::math::students_t dist(model.n - 2);
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  const double dx = rut - model.rut_mean;
  const double half =
      t * model.residual_se *
      std::sqrt(1.0 / model.n + dx * dx / model.sxx);
  return std::make_pair(*center - half, *center + half);
}

absl::StatusOr<double> RSquared(std::span<const double> observed,
                                std::span<const double> predicted) {
  if (absl::Status s = CheckLengths(observed.size(), predicted.size());
      !s.ok()) {
    return s;
  }
  const double mean = Mean(observed);
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    ss_res += (predicted[i] - observed[i]) * (predicted[i] - observed[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  if (!(ss_tot > 0.0)) {
    return absl::InvalidArgumentError(
        "ZeroVariance: observed values are all equal");
  }
  return 1.0 - ss_res / ss_tot;
}

absl::StatusOr<double> Pearson(std::span<const double> x,
                               std::span<const double> y) {
  if (absl::Status s = CheckLengths(x.size(), y.size()); !s.ok()) return s;
  if (x.size() < 2) {
    return absl::InvalidArgumentError("LengthMismatch: need >= 2 pairs");
  }
  const double mx = Mean(x), my = Mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    return absl::InvalidArgumentError("ZeroVariance: constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<ValidationRow> Table1ValidationRows() {
  std::vector<ValidationRow> rows;
  for (const Table1Study& s : Table1Studies()) {
    rows.push_back({s.study_id, s.rut, s.observed_mean_rsp_t,
                    s.predicted_mean_rsp_t});
  }
  return rows;
}

absl::StatusOr<ValidationReport> ValidateTable1(
    const LinearRspModel& model, std::vector<ValidationRow> rows) {
  if (rows.empty()) {
    return absl::InvalidArgumentError("no validation rows");
  }
  ValidationReport report;
  std::vector<double> observed, predicted;
  for (ValidationRow& row : rows) {
    absl::StatusOr<double> p = Predict(model, row.rut);
    if (!p.ok()) return p.status();
    row.predicted_rsp_t = *p;
    observed.push_back(row.observed_mean_rsp_t);
    predicted.push_back(*p);
    report.max_abs_err =
        std::max(report.max_abs_err, std::abs(*p - row.observed_mean_rsp_t));
  }
  absl::StatusOr<double> r2 = RSquared(observed, predicted);
  if (!r2.ok()) return r2.status();
  report.r_squared = *r2;
  report.rows = std::move(rows);
  return report;
}

nlohmann::json ModelJson(const LinearRspModel& model) {
  return {{"k", model.k},
          {"m", model.m},
          {"n", model.n},
          {"residual_se", model.residual_se},
          {"rut_mean", model.rut_mean},
          {"sxx", model.sxx}};
}

absl::StatusOr<LinearRspModel> ParseModelJson(const nlohmann::json& j) {
  LinearRspModel model;
  try {
    model.k = j.at("k").get<double>();
    model.m = j.at("m").get<double>();
    model.n = j.value("n", 0);
    model.residual_se = j.value("residual_se", 0.0);
    model.rut_mean = j.value("rut_mean", 0.0);
    model.sxx = j.value("sxx", 0.0);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed model JSON: ", e.what()));
  }
  return model;
}

nlohmann::json ValidationReportJson(const ValidationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ValidationRow& r : report.rows) {
    rows.push_back({{"study_id", r.study_id},
                    {"rut", r.rut},
                    {"observed_mean_rsp_t", r.observed_mean_rsp_t},
                    {"predicted_rsp_t", r.predicted_rsp_t}});
  }
  return {{"rows", rows},
          {"r_squared", report.r_squared},
          {"max_abs_err", report.max_abs_err}};
}

}  // namespace response_timing
