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

// Synthetic kinematic traces for the conflict scenario families: lead
// vehicle braking (S1), lead vehicle braking while exiting the lane (S2),
// closing in on a stopped or slow lead vehicle (S3), lateral cut-in from an
// adjacent lane and crossing-path conflicts.
//
// All motion is piecewise constant-acceleration and integrated in closed
// form, so positions carry no solver error.

#ifndef RESPONSE_TIMING_SCENARIO_SIM_H_
#define RESPONSE_TIMING_SCENARIO_SIM_H_

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/table1.h"
#include "response_timing/trace.h"

namespace response_timing {

// Event-level judgments copied into the generated trace.
struct ContextTemplate {
  bool brake_light_surprising = true;
  bool expected_slowdown_context = false;
  bool eyes_off_path = false;
  bool impaired = false;
};

struct RearEndSpec {
  double sv_speed = 22.22;
  double lv_speed = 22.22;
  // Gap = initial_time_gap * sv_speed, measured at brake_onset_t (S1, S2)
  // or at t = 0 (S3, where the lead vehicle never brakes).
  double initial_time_gap = 1.5;
  // Magnitude, applied from brake_onset_t until standstill. 0 = no braking.
  double lv_decel = 5.0;
  double brake_onset_t = 5.0;
  double lv_width = 1.8;
  double duration = 15.0;
  double dt = kDefaultTraceDt;
  ContextTemplate context;
  // S2 only: lateral drift of the lead vehicle out of the lane, which stops
  // when the lead vehicle comes to rest.
  double exit_lateral_speed = 0.5;
  std::optional<double> exit_onset_t;  // default brake_onset_t - 1 s
};

enum class RearEndVariant { kS1, kS2, kS3 };

struct CutInSpec {
  double sv_speed = 25.0;
  double pov_speed = 25.0;
  // Lane-relative arc-length gap pov.s - sv.s.
  double initial_longitudinal_gap = 15.0;
  // Adjacent-lane centre relative to the SV lane centre (left positive).
  double lateral_offset = 3.5;
  double lateral_onset_t = 5.0;
  double lateral_speed = 1.0;
  double lane_half_width = 1.75;
  double road_curvature = 0.0;
  double pov_width = 1.8;
  double dt = kDefaultTraceDt;
  double duration = 12.0;
  ContextTemplate context;
};

enum class CrossingProfile { kNone, kComfortable, kStopThenGo };

struct CrossingSpec {
  double sv_speed = 13.0;
  double pov_approach_speed = 8.0;
  double pov_start_distance_to_boundary = 20.0;
  CrossingProfile pov_decel_profile = CrossingProfile::kNone;
  double reference_boundary = 1.75;
  std::optional<std::pair<double, double>> occlusion_interval;
  double dt = kDefaultTraceDt;
  double duration = 8.0;
  double pov_width = 1.8;
  // Longitudinal position of the POV's path along the SV road.
  double conflict_x = 40.0;
  // Braking used by the comfortable and stop-then-go profiles.
  double comfortable_decel = 2.0;
  // Stop-then-go: stop this far before the boundary, wait, then go.
  double stop_offset = 0.5;
  double dwell = 1.0;
  double go_speed = 1.5;
  double go_accel = 1.5;
};

inline constexpr double kMaxComfortableDecel = 3.0;

// Errors: SpecInvalid.
absl::StatusOr<KinematicTrace> GenerateRearEnd(const RearEndSpec& spec,
                                               RearEndVariant variant);
absl::StatusOr<KinematicTrace> GenerateCutIn(const CutInSpec& spec);
absl::StatusOr<KinematicTrace> GenerateCrossing(const CrossingSpec& spec);

// SI rear-end spec for one of the published simulator studies.
RearEndSpec RearEndSpecFromStudy(const Table1Study& study,
                                 double lv_width = 1.8);

// A scenario spec file: one JSON object with "kind" in {rear_end, cut_in,
// crossing} and the fields of the matching spec struct. Optional
// "study_id" links the scenario to a published study and optional "em"
// supplies an externally annotated evasive-maneuver onset.
struct ScenarioSpec {
  std::string name;
  std::variant<std::pair<RearEndSpec, RearEndVariant>, CutInSpec,
               CrossingSpec>
      spec;
  std::optional<std::string> study_id;
  std::optional<double> em;
};

absl::StatusOr<ScenarioSpec> ParseScenarioSpec(const nlohmann::json& j);
nlohmann::json ScenarioSpecJson(const ScenarioSpec& spec);
absl::StatusOr<KinematicTrace> Generate(const ScenarioSpec& spec,
                                        std::optional<double> dt_override =
                                            std::nullopt);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_SCENARIO_SIM_H_
