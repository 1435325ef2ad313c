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

// Optical angle, looming (angular expansion rate) and optical
// time-to-collision of a lead object, from geometry or from the object's
// pixel width in a forward camera image.

#ifndef RESPONSE_TIMING_LOOMING_H_
#define RESPONSE_TIMING_LOOMING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "response_timing/trace.h"

namespace response_timing {

inline constexpr double kTauMinThetaDot = 1e-6;  // rad/s

struct CameraModel {
  double focal_length_mm = 3.6;
  // Multiplies a measured pixel width to obtain the width on the sensor in
  // mm. The default is the SHRP2 effective/resized pixel ratio.
  double pixel_to_mm = 720.0 / 500.0;
};

struct LoomingSignal {
  double dt = kDefaultTraceDt;
  double t0 = 0.0;
  std::vector<double> theta;      // rad
  std::vector<double> theta_dot;  // rad/s
  // theta / theta_dot, absent where theta_dot <= kTauMinThetaDot.
  std::vector<std::optional<double>> tau;

  size_t size() const { return theta.size(); }
  double TimeAt(size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double EndTime() const { return size() == 0 ? t0 : TimeAt(size() - 1); }
};

// 2 * atan((w_px * pixel_to_mm / 2) / focal_length). NegativeWidth on w < 0.
absl::StatusOr<double> ThetaFromPixels(double width_px,
                                       const CameraModel& camera = {});

// 2 * atan(width / (2 * range)).
absl::StatusOr<double> ThetaFromGeometry(double width, double range);

// Central differences (one-sided at the ends) followed by a centred moving
// average over `smoothing_window` samples, truncated at the series ends.
// The window must be odd; 1 disables smoothing.
absl::StatusOr<std::vector<double>> ThetaDotSeries(
    std::span<const double> theta, double dt, int smoothing_window = 1);

// Earliest time >= from_t where the uniformly sampled signal reaches
// `threshold`, linearly interpolated between the bracketing samples.
// Returns from_t itself when the signal is already at or above threshold.
std::optional<double> FirstCrossing(std::span<const double> signal,
                                    double t0, double dt, double threshold,
                                    double from_t);

// Linear interpolation of a uniformly sampled series, clamped to its span.
double SampleAt(std::span<const double> signal, double t0, double dt,
                double t);

LoomingSignal LoomingFromTheta(std::vector<double> theta, double t0,
                               double dt, std::vector<double> theta_dot);

// Looming of the POV as seen from the SV using range = pov.x - sv.x and
// the trace's pov_width. The signal stops at the last sample before
// contact (range <= 0), where the optical angle is no longer defined.
absl::StatusOr<LoomingSignal> ComputeLooming(const KinematicTrace& trace,
                                             int smoothing_window = 1);

// CSV columns t, theta, theta_dot, tau; an empty tau cell means absent.
std::string FormatLoomingCsv(const LoomingSignal& signal);
absl::StatusOr<LoomingSignal> ParseLoomingCsv(std::string_view text);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_LOOMING_H_
