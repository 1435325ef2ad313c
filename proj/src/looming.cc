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

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"

namespace response_timing {

absl::StatusOr<double> ThetaFromPixels(double width_px,
                                       const CameraModel& camera) {
  if (width_px < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("NegativeWidth: ", width_px, " px"));
  }
  if (!(camera.focal_length_mm > 0.0) || !(camera.pixel_to_mm > 0.0)) {
    return absl::InvalidArgumentError(
        "camera focal length and pixel scale must be positive");
  }
  const double width_mm = width_px * camera.pixel_to_mm;
  return 2.0 * std::atan(width_mm / 2.0 / camera.focal_length_mm);
}

absl::StatusOr<double> ThetaFromGeometry(double width, double range) {
  if (!(range > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("NonPositiveRange: ", range, " m"));
  }
  if (!(width > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("width must be positive, got ", width));
  }
  return 2.0 * std::atan(width / (2.0 * range));
}

absl::StatusOr<std::vector<double>> ThetaDotSeries(
    std::span<const double> theta, double dt, int smoothing_window) {
  const size_t n = theta.size();
  if (n < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("TooShort: need at least 3 samples, got ", n));
  }
  if (!(dt > 0.0)) return absl::InvalidArgumentError("dt must be positive");
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "smoothing window must be odd and >= 1, got ", smoothing_window));
  }
  std::vector<double> rate(n);
  rate[0] = (theta[1] - theta[0]) / dt;
  rate[n - 1] = (theta[n - 1] - theta[n - 2]) / dt;
  for (size_t i = 1; i + 1 < n; ++i) {
    rate[i] = (theta[i + 1] - theta[i - 1]) / (2.0 * dt);
  }
  if (smoothing_window == 1) return rate;

  const size_t half = static_cast<size_t>(smoothing_window / 2);
  std::vector<double> smoothed(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t reach = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (size_t j = i - reach; j <= i + reach; ++j) sum += rate[j];
    smoothed[i] = sum / static_cast<double>(2 * reach + 1);
  }
  return smoothed;
}

double SampleAt(std::span<const double> signal, double t0, double dt,
                double t) {
  if (signal.empty()) return 0.0;
  const double pos = (t - t0) / dt;
  if (pos <= 0.0) return signal.front();
  const size_t last = signal.size() - 1;
  if (pos >= static_cast<double>(last)) return signal.back();
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(lo);
  if (w == 0.0) return signal[lo];
  return signal[lo] + (signal[lo + 1] - signal[lo]) * w;
}

std::optional<double> FirstCrossing(std::span<const double> signal,
                                    double t0, double dt, double threshold,
                                    double from_t) {
  if (signal.empty() || !(dt > 0.0)) return std::nullopt;
  const double end = t0 + static_cast<double>(signal.size() - 1) * dt;
  const double start = std::max(from_t, t0);
  if (start > end + 1e-9 * dt) return std::nullopt;

  double prev_t = start;
  double prev_v = SampleAt(signal, t0, dt, start);
  if (prev_v >= threshold) return start;
  // First sample strictly after `start`.
  size_t j = static_cast<size_t>(std::floor((start - t0) / dt + 1e-9)) + 1;
  for (; j < signal.size(); ++j) {
    const double tj = t0 + static_cast<double>(j) * dt;
    const double vj = signal[j];
    if (vj >= threshold) {
      const double w = (threshold - prev_v) / (vj - prev_v);
      return prev_t + w * (tj - prev_t);
    }
    prev_t = tj;
    prev_v = vj;
  }
  return std::nullopt;
}

LoomingSignal LoomingFromTheta(std::vector<double> theta, double t0,
                               double dt, std::vector<double> theta_dot) {
  LoomingSignal out;
  out.t0 = t0;
  out.dt = dt;
  out.tau.resize(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    if (theta_dot[i] > kTauMinThetaDot) out.tau[i] = theta[i] / theta_dot[i];
  }
  out.theta = std::move(theta);
  out.theta_dot = std::move(theta_dot);
  return out;
}

absl::StatusOr<LoomingSignal> ComputeLooming(const KinematicTrace& trace,
                                             int smoothing_window) {
  std::vector<double> theta;
  theta.reserve(trace.size());
  for (size_t i = 0; i < trace.size(); ++i) {
    const double range = trace.Range(i);
    if (!(range > 0.0)) break;
    absl::StatusOr<double> th = ThetaFromGeometry(trace.pov_width, range);
    if (!th.ok()) return th.status();
    theta.push_back(*th);
  }
  absl::StatusOr<std::vector<double>> rate =
      ThetaDotSeries(theta, trace.dt, smoothing_window);
  if (!rate.ok()) return rate.status();
  return LoomingFromTheta(std::move(theta), trace.t0, trace.dt,
                          *std::move(rate));
}

std::string FormatLoomingCsv(const LoomingSignal& signal) {
  std::string out = "t,theta,theta_dot,tau\n";
  for (size_t i = 0; i < signal.size(); ++i) {
    absl::StrAppend(&out, FormatDouble(signal.TimeAt(i)), ",",
                    FormatDouble(signal.theta[i]), ",",
                    FormatDouble(signal.theta_dot[i]), ",",
                    signal.tau[i] ? FormatDouble(*signal.tau[i]) : "", "\n");
  }
  return out;
}

absl::StatusOr<LoomingSignal> ParseLoomingCsv(std::string_view text) {
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) return table.status();
  const auto t_col = table->Column("t");
  const auto theta_col = table->Column("theta");
  const auto rate_col = table->Column("theta_dot");
  if (!t_col || !theta_col || !rate_col) {
    return absl::InvalidArgumentError(
        "MissingColumn: looming CSV needs t, theta, theta_dot");
  }
  std::vector<double> times, theta, rate;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    auto get = [&](size_t c) -> std::optional<double> {
      return c < row.size() ? ParseDouble(row[c]) : std::nullopt;
    };
    auto t = get(*t_col), th = get(*theta_col), td = get(*rate_col);
    if (!t || !th || !td || std::isnan(*th) || std::isnan(*td)) {
      return absl::InvalidArgumentError(
          absl::StrCat("NaNValue: bad looming row ", r));
    }
    if (!times.empty() && !(*t > times.back())) {
      return absl::InvalidArgumentError(
          absl::StrCat("NonMonotonicTime: looming row ", r));
    }
    times.push_back(*t);
    theta.push_back(*th);
    rate.push_back(*td);
  }
  if (times.size() < 2) {
    return absl::InvalidArgumentError("looming CSV needs >= 2 rows");
  }
  const double dt =
      (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  return LoomingFromTheta(std::move(theta), times.front(), dt,
                          std::move(rate));
}

}  // namespace response_timing
