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

// Heuristic stimulus annotation: stimulus onset T1 (first surprising
// evidence), stimulus end T2 (belief update complete) and the ramp-up time
// RUT = T2 - T1, dispatched on the trace's scenario kind.

#ifndef RESPONSE_TIMING_ANNOTATOR_H_
#define RESPONSE_TIMING_ANNOTATOR_H_

#include <optional>
#include <string_view>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/looming.h"
#include "response_timing/trace.h"

namespace response_timing {

enum class T1Rationale {
  kSurprisingBrakeLight,
  kSurprisingDecelVisible,
  kSurprisingLooming,
  kLateralMotionOnset,
  kHeadingDeviation,
  kBoundaryApproachRule,
  kCompleteStop,
  kAppearFromOcclusion,
};

std::string_view T1RationaleName(T1Rationale rationale);
absl::StatusOr<T1Rationale> ParseT1Rationale(std::string_view name);

enum class ExtrapolationSignal { kThetaDot, kTheta };

struct AnnotatorConfig {
  double t2_looming_threshold = 0.05;        // rad/s
  double visibility_threshold = 0.005;       // rad/s
  double surprising_decel = 3.0;             // m/s^2
  double braking_eps = 0.1;                  // m/s^2, any braking
  double decel_debounce = 0.3;               // s
  double complete_stop_speed = 0.1;          // m/s
  double lat_v_eps = 0.1;                    // m/s
  double heading_eps = 0.02;                 // rad
  double boundary_proximity = 1.0;           // m
  double crossing_start_speed = 1.0;         // m/s
  double stationary_speed = 0.1;             // m/s
  double required_decel_threshold = 3.0;     // m/s^2
  double extrapolation_lookback = 1.0;       // s before T1
  double extrapolation_horizon = 10.0;       // s after T1
  ExtrapolationSignal extrapolation_signal = ExtrapolationSignal::kThetaDot;
};

struct Annotation {
  double t1 = 0.0;
  double t2 = 0.0;
  double rut = 0.0;
  std::optional<double> em;
  std::optional<double> rsp_t;
  T1Rationale t1_rationale = T1Rationale::kSurprisingBrakeLight;
  bool extrapolated_t2 = false;
};

// `looming` must be derived from `trace` (rear-end kinds) and may be empty
// for the lateral kinds. `em` is an externally annotated evasive-maneuver
// onset; when it precedes the looming threshold crossing, T2 comes from
// ExtrapolateT2. Errors: NoConflictDetected, ScenarioUnknown.
absl::StatusOr<Annotation> Annotate(const KinematicTrace& trace,
                                    const LoomingSignal& looming,
                                    const AnnotatorConfig& config = {},
                                    std::optional<double> em = std::nullopt);

// Least-squares quadratic through the looming samples in
// [t1 - lookback, em], then the first time at or after t1 where the fitted
// looming reaches the T2 threshold. Absent when that does not happen within
// the extrapolation horizon. Errors: WindowTooShort (< 3 samples).
absl::StatusOr<std::optional<double>> ExtrapolateT2(
    const LoomingSignal& looming, double t1, double em,
    const AnnotatorConfig& config = {});

// v^2 / (2 distance). Errors: NonPositiveDistance.
absl::StatusOr<double> RequiredDecel(double speed, double distance);

// Sets em and the derived rsp_t (present only when em >= t1).
void SetEvasiveManeuver(Annotation* annotation, std::optional<double> em);

nlohmann::json AnnotationJson(const Annotation& annotation);
absl::StatusOr<Annotation> ParseAnnotationJson(const nlohmann::json& j);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_ANNOTATOR_H_
