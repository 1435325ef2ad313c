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

// Kinematic trace data model: time-indexed states of the subject vehicle
// (SV) and the principal other vehicle (POV), plus the context flags that
// the annotation heuristics consume.
//
// Coordinates: x is longitudinal along the SV's road, y lateral (left
// positive). For rear-end scenarios the bumper-to-bumper range is
// pov.x - sv.x. Lateral scenarios (cut-in, crossing path) describe the POV
// approaching a lateral boundary from above, i.e. with y decreasing towards
// LaneGeometry::boundary_y.

#ifndef RESPONSE_TIMING_TRACE_H_
#define RESPONSE_TIMING_TRACE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace response_timing {

inline constexpr double kDefaultTraceDt = 0.1;
inline constexpr double kMaxAbsAcceleration = 15.0;

struct AgentState {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double v = 0.0;        // m/s, >= 0
  double a = 0.0;        // m/s^2, negative = braking
  double heading = 0.0;  // rad, 0 = road tangent at the origin
};

enum class ScenarioKind { kS1, kS2, kS3, kCutIn, kCrossingPath, kUnknown };

std::string_view ScenarioKindName(ScenarioKind kind);
absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name);

// Per-sample flags plus the event-level judgments that a human annotator
// would supply (surprising brake light, expected slowdown, ...).
struct ContextFlags {
  std::vector<bool> brake_light_on;
  std::vector<bool> occluded;
  bool brake_light_surprising = false;
  bool expected_slowdown_context = false;
  bool eyes_off_path = false;
  bool impaired = false;
};

// Lateral reference needed by the cut-in and crossing-path heuristics.
// boundary_y is the SV lane boundary (cut-in) or the reference boundary
// (crossing), expressed lane-relative. road_curvature > 0 bends the SV lane
// centreline to the left along a circular arc that starts at the origin
// tangent to +x.
struct LaneGeometry {
  double boundary_y = 0.0;
  double road_curvature = 0.0;
};

struct KinematicTrace {
  double dt = kDefaultTraceDt;
  double t0 = 0.0;
  std::vector<AgentState> sv;
  std::vector<AgentState> pov;
  double pov_width = 1.8;
  ContextFlags flags;
  ScenarioKind scenario_kind = ScenarioKind::kUnknown;
  std::optional<LaneGeometry> lane;

  size_t size() const { return sv.size(); }
  double TimeAt(size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double EndTime() const { return size() == 0 ? t0 : TimeAt(size() - 1); }
  double Range(size_t i) const { return pov[i].x - sv[i].x; }
};

struct Violation {
  std::string field;
  std::optional<size_t> index;
  std::string message;
};

// Empty iff every structural and physical invariant of the trace holds.
std::vector<Violation> ValidateTrace(const KinematicTrace& trace);

// Lane-relative (arc length, lateral offset) of a point. Identity for a
// straight road.
struct LanePoint {
  double s = 0.0;
  double d = 0.0;
  double tangent_heading = 0.0;
};
LanePoint ToLaneFrame(double x, double y, double road_curvature);
// Inverse of ToLaneFrame.
void FromLaneFrame(double s, double d, double road_curvature, double* x,
                   double* y);

// POV lateral position relative to the SV lane centreline, per sample.
std::vector<double> PovLaneLateral(const KinematicTrace& trace);

// CSV body only; event-level fields default. Errors are prefixed with
// MissingColumn / NonMonotonicTime / NaNValue and name the row or column.
absl::StatusOr<KinematicTrace> ParseTraceCsv(std::string_view text);
std::string FormatTraceCsv(const KinematicTrace& trace);

nlohmann::json SidecarJson(const KinematicTrace& trace);
absl::Status ApplySidecar(const nlohmann::json& sidecar,
                          KinematicTrace* trace);

// Sidecar path used when none is given: foo.csv -> foo.json.
std::filesystem::path DefaultSidecarPath(const std::filesystem::path& csv);

// Loads and validates a trace. A missing sidecar is only an error when it
// was requested explicitly.
absl::StatusOr<KinematicTrace> LoadTrace(
    const std::filesystem::path& csv,
    std::optional<std::filesystem::path> sidecar = std::nullopt);

absl::Status SaveTrace(const KinematicTrace& trace,
                       const std::filesystem::path& csv,
                       std::optional<std::filesystem::path> sidecar =
                           std::nullopt);

// Linear interpolation of continuous fields on a new uniform grid; boolean
// flags are carried from the nearest previous sample.
absl::StatusOr<KinematicTrace> Resample(const KinematicTrace& trace,
                                        double dt_new);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_TRACE_H_
