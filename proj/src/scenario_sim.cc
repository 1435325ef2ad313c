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

#include "response_timing/scenario_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"

namespace response_timing {
namespace {

// One constant-acceleration piece of a 1-D motion, valid from t_start until
// the next segment begins.
struct Segment {
  double t_start = 0.0;
  double pos = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

struct Motion1D {
  double pos = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

Motion1D Evaluate(const std::vector<Segment>& segments, double t) {
  const Segment* seg = &segments.front();
  for (const Segment& s : segments) {
    if (s.t_start <= t) seg = &s;
  }
  const double tau = t - seg->t_start;
  return {seg->pos + seg->vel * tau + 0.5 * seg->acc * tau * tau,
          seg->vel + seg->acc * tau, seg->acc};
}

// Appends a segment continuing the motion of the last one at time t.
void Continue(std::vector<Segment>* segments, double t, double acc,
              std::optional<double> vel_override = std::nullopt) {
  Motion1D m = Evaluate(*segments, t);
  segments->push_back({t, m.pos, vel_override.value_or(m.vel), acc});
}

absl::Status SpecInvalid(std::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("SpecInvalid: ", std::string(what)));
}

size_t SampleCount(double duration, double dt) {
  return static_cast<size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

void ApplyContext(const ContextTemplate& context, KinematicTrace* trace) {
  trace->flags.brake_light_surprising = context.brake_light_surprising;
  trace->flags.expected_slowdown_context = context.expected_slowdown_context;
  trace->flags.eyes_off_path = context.eyes_off_path;
  trace->flags.impaired = context.impaired;
}

absl::Status CheckGrid(double dt, double duration) {
  if (!(dt > 0.0)) return SpecInvalid("dt must be positive");
  if (!(duration >= dt)) return SpecInvalid("duration must cover >= 1 step");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<KinematicTrace> GenerateRearEnd(const RearEndSpec& spec,
                                               RearEndVariant variant) {
  if (absl::Status s = CheckGrid(spec.dt, spec.duration); !s.ok()) return s;
  if (spec.sv_speed < 0.0 || spec.lv_speed < 0.0) {
    return SpecInvalid("speeds must be non-negative");
  }
  if (spec.lv_decel < 0.0 || spec.lv_decel > kMaxAbsAcceleration) {
    return SpecInvalid("lv_decel must lie in [0, 15] m/s^2");
  }
  if (!(spec.lv_width > 0.0)) return SpecInvalid("lv_width must be positive");
  if (!(spec.initial_time_gap > 0.0) || !(spec.sv_speed > 0.0)) {
    return SpecInvalid("initial gap must be positive");
  }
  if (spec.brake_onset_t < 0.0) {
    return SpecInvalid("brake_onset_t must be non-negative");
  }

  const bool brakes = variant != RearEndVariant::kS3 && spec.lv_decel > 0.0;
  const double gap = spec.initial_time_gap * spec.sv_speed;
  const double ref_t = variant == RearEndVariant::kS3 ? 0.0
                                                      : spec.brake_onset_t;
  const double x0 = gap + (spec.sv_speed - spec.lv_speed) * ref_t;
  if (!(x0 > 0.0)) {
    return SpecInvalid(absl::StrCat(
        "lead vehicle would start at or behind the SV (gap at t = 0 is ",
        x0, " m)"));
  }

  std::vector<Segment> lv = {{0.0, x0, spec.lv_speed, 0.0}};
  double stop_t = std::numeric_limits<double>::infinity();
  if (brakes) {
    Continue(&lv, spec.brake_onset_t, -spec.lv_decel);
    stop_t = spec.brake_onset_t + spec.lv_speed / spec.lv_decel;
    Continue(&lv, stop_t, 0.0, 0.0);
  }

  std::vector<Segment> lateral = {{0.0, 0.0, 0.0, 0.0}};
  if (variant == RearEndVariant::kS2) {
    if (spec.exit_lateral_speed < 0.0) {
      return SpecInvalid("exit_lateral_speed must be non-negative");
    }
    const double onset = std::max(
        0.0, spec.exit_onset_t.value_or(spec.brake_onset_t - 1.0));
    if (onset < stop_t) {
      lateral.push_back({onset, 0.0, spec.exit_lateral_speed, 0.0});
      if (std::isfinite(stop_t)) Continue(&lateral, stop_t, 0.0, 0.0);
    }
  }

  KinematicTrace trace;
  trace.dt = spec.dt;
  trace.t0 = 0.0;
  trace.pov_width = spec.lv_width;
  trace.scenario_kind = variant == RearEndVariant::kS1   ? ScenarioKind::kS1
                        : variant == RearEndVariant::kS2 ? ScenarioKind::kS2
                                                         : ScenarioKind::kS3;
  ApplyContext(spec.context, &trace);

  const size_t n = SampleCount(spec.duration, spec.dt);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    const AgentState sv{spec.sv_speed * t, 0.0, spec.sv_speed, 0.0, 0.0};
    const Motion1D lon = Evaluate(lv, t);
    const Motion1D lat = Evaluate(lateral, t);
    const double vx = std::max(0.0, lon.vel);
    AgentState pov{lon.pos, lat.pos, std::hypot(vx, lat.vel), lon.acc,
                   vx > 0.0 ? std::atan2(lat.vel, vx) : 0.0};
    // Stop at contact: looming is undefined beyond it.
    if (!(pov.x - sv.x > 0.0)) break;
    trace.sv.push_back(sv);
    trace.pov.push_back(pov);
    trace.flags.brake_light_on.push_back(brakes && t >= spec.brake_onset_t);
    trace.flags.occluded.push_back(false);
  }
  if (trace.size() < 2) {
    return SpecInvalid("vehicles are in contact before the second sample");
  }
  return trace;
}

absl::StatusOr<KinematicTrace> GenerateCutIn(const CutInSpec& spec) {
  if (absl::Status s = CheckGrid(spec.dt, spec.duration); !s.ok()) return s;
  if (!(spec.lateral_speed > 0.0)) {
    return SpecInvalid("lateral_speed must be positive for a cut-in");
  }
  if (!(spec.lane_half_width > 0.0)) {
    return SpecInvalid("lane_half_width must be positive");
  }
  if (!(spec.lateral_offset > 0.0)) {
    return SpecInvalid("lateral_offset must be positive (POV on the left)");
  }
  if (spec.sv_speed < 0.0 || spec.pov_speed < 0.0) {
    return SpecInvalid("speeds must be non-negative");
  }
  if (!(spec.pov_width > 0.0)) return SpecInvalid("pov_width must be positive");
  const double k = spec.road_curvature;
  if (std::abs(k) * (spec.lateral_offset + spec.lane_half_width) >= 1.0) {
    return SpecInvalid("road curvature too tight for the lane offset");
  }

  std::vector<Segment> lateral = {{0.0, spec.lateral_offset, 0.0, 0.0}};
  lateral.push_back(
      {spec.lateral_onset_t, spec.lateral_offset, -spec.lateral_speed, 0.0});
  const double settle_t =
      spec.lateral_onset_t + spec.lateral_offset / spec.lateral_speed;
  lateral.push_back({settle_t, 0.0, 0.0, 0.0});

  KinematicTrace trace;
  trace.dt = spec.dt;
  trace.t0 = 0.0;
  trace.pov_width = spec.pov_width;
  trace.scenario_kind = ScenarioKind::kCutIn;
  trace.lane = LaneGeometry{spec.lane_half_width, k};
  ApplyContext(spec.context, &trace);

  const size_t n = SampleCount(spec.duration, spec.dt);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    const double sv_s = spec.sv_speed * t;
    AgentState sv{0.0, 0.0, spec.sv_speed, 0.0, k * sv_s};
    FromLaneFrame(sv_s, 0.0, k, &sv.x, &sv.y);

    const double pov_s = spec.initial_longitudinal_gap + spec.pov_speed * t;
    const Motion1D lat = Evaluate(lateral, t);
    const double along = spec.pov_speed * (1.0 - k * lat.pos);
    AgentState pov{0.0, 0.0, std::hypot(along, lat.vel), 0.0,
                   k * pov_s + std::atan2(lat.vel, along)};
    FromLaneFrame(pov_s, lat.pos, k, &pov.x, &pov.y);

    trace.sv.push_back(sv);
    trace.pov.push_back(pov);
    trace.flags.brake_light_on.push_back(false);
    trace.flags.occluded.push_back(false);
  }
  return trace;
}

absl::StatusOr<KinematicTrace> GenerateCrossing(const CrossingSpec& spec) {
  if (absl::Status s = CheckGrid(spec.dt, spec.duration); !s.ok()) return s;
  if (!(spec.pov_start_distance_to_boundary > 0.0)) {
    return SpecInvalid("pov_start_distance_to_boundary must be positive");
  }
  if (spec.sv_speed < 0.0 || spec.pov_approach_speed < 0.0) {
    return SpecInvalid("speeds must be non-negative");
  }
  if (!(spec.pov_width > 0.0)) return SpecInvalid("pov_width must be positive");
  if (!(spec.comfortable_decel > 0.0) ||
      spec.comfortable_decel > kMaxComfortableDecel) {
    return SpecInvalid("comfortable_decel must lie in (0, 3] m/s^2");
  }
  if (spec.occlusion_interval &&
      spec.occlusion_interval->first > spec.occlusion_interval->second) {
    return SpecInvalid("occlusion interval is reversed");
  }

  const double d0 = spec.pov_start_distance_to_boundary;
  const double v0 = spec.pov_approach_speed;
  // Progress along the POV path towards (and past) the boundary.
  std::vector<Segment> path = {{0.0, 0.0, v0, 0.0}};

  // Brings the POV to rest after `distance`, cruising first when the
  // comfortable deceleration allows. Returns the stop time.
  auto stop_within = [&](double distance) -> absl::StatusOr<double> {
    if (v0 == 0.0) return 0.0;
    if (!(distance > 0.0)) return SpecInvalid("no room to stop");
    const double braking = v0 * v0 / (2.0 * spec.comfortable_decel);
    double brake_t = 0.0;
    double decel = spec.comfortable_decel;
    if (braking <= distance) {
      brake_t = (distance - braking) / v0;
    } else {
      decel = v0 * v0 / (2.0 * distance);
      if (decel > kMaxComfortableDecel) {
        return SpecInvalid(absl::StrCat(
            "stopping within ", distance, " m needs ", decel, " m/s^2"));
      }
    }
    path.back().acc = 0.0;
    if (brake_t > 0.0) {
      Continue(&path, brake_t, -decel);
    } else {
      path.back().acc = -decel;
    }
    const double stop_t = brake_t + v0 / decel;
    path.push_back({stop_t, distance, 0.0, 0.0});
    return stop_t;
  };

  switch (spec.pov_decel_profile) {
    case CrossingProfile::kNone:
      if (!(v0 > 0.0)) return SpecInvalid("POV must move with profile none");
      break;
    case CrossingProfile::kComfortable: {
      if (!(v0 > 0.0)) {
        return SpecInvalid("POV must move with profile comfortable");
      }
      absl::StatusOr<double> stop = stop_within(d0);
      if (!stop.ok()) return stop.status();
      break;
    }
    case CrossingProfile::kStopThenGo: {
      if (!(spec.go_speed > 0.0) || !(spec.go_accel > 0.0)) {
        return SpecInvalid("go_speed and go_accel must be positive");
      }
      const double stop_distance =
          v0 == 0.0 ? 0.0 : d0 - spec.stop_offset;
      absl::StatusOr<double> stop = stop_within(stop_distance);
      if (!stop.ok()) return stop.status();
      const double go_t = *stop + spec.dwell;
      path.push_back({go_t, stop_distance, 0.0, spec.go_accel});
      Continue(&path, go_t + spec.go_speed / spec.go_accel, 0.0,
               spec.go_speed);
      break;
    }
  }

  KinematicTrace trace;
  trace.dt = spec.dt;
  trace.t0 = 0.0;
  trace.pov_width = spec.pov_width;
  trace.scenario_kind = ScenarioKind::kCrossingPath;
  trace.lane = LaneGeometry{spec.reference_boundary, 0.0};
  trace.flags.brake_light_surprising = false;

  const size_t n = SampleCount(spec.duration, spec.dt);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    const Motion1D m = Evaluate(path, t);
    trace.sv.push_back({spec.sv_speed * t, 0.0, spec.sv_speed, 0.0, 0.0});
    trace.pov.push_back({spec.conflict_x,
                         spec.reference_boundary + d0 - m.pos,
                         std::max(0.0, m.vel), m.acc,
                         -std::numbers::pi / 2.0});
    trace.flags.brake_light_on.push_back(false);
    const bool occluded = spec.occlusion_interval &&
                          t >= spec.occlusion_interval->first &&
                          t <= spec.occlusion_interval->second;
    trace.flags.occluded.push_back(occluded);
  }
  return trace;
}

RearEndSpec RearEndSpecFromStudy(const Table1Study& study, double lv_width) {
  RearEndSpec spec;
  spec.sv_speed = study.sv_speed_kph * kKphToMps;
  spec.lv_speed = study.lv_speed_kph * kKphToMps;
  spec.initial_time_gap = study.initial_time_gap_s;
  spec.lv_decel = study.lv_decel_g * kGravity;
  spec.lv_width = lv_width;
  spec.brake_onset_t = 5.0;
  spec.duration = 15.0;
  spec.context.brake_light_surprising = true;
  spec.context.expected_slowdown_context = false;
  return spec;
}

namespace {

using nlohmann::json;

template <typename T>
void Read(const json& j, const char* key, T* dst) {
  if (j.contains(key)) *dst = j.at(key).get<T>();
}

void ReadContext(const json& j, ContextTemplate* c) {
  if (!j.contains("context")) return;
  const json& cj = j.at("context");
  Read(cj, "brake_light_surprising", &c->brake_light_surprising);
  Read(cj, "expected_slowdown_context", &c->expected_slowdown_context);
  Read(cj, "eyes_off_path", &c->eyes_off_path);
  Read(cj, "impaired", &c->impaired);
}

json ContextJson(const ContextTemplate& c) {
  return {{"brake_light_surprising", c.brake_light_surprising},
          {"expected_slowdown_context", c.expected_slowdown_context},
          {"eyes_off_path", c.eyes_off_path},
          {"impaired", c.impaired}};
}

constexpr std::pair<CrossingProfile, const char*> kProfiles[] = {
    {CrossingProfile::kNone, "none"},
    {CrossingProfile::kComfortable, "comfortable"},
    {CrossingProfile::kStopThenGo, "stop_then_go"}};

}  // namespace

absl::StatusOr<ScenarioSpec> ParseScenarioSpec(const json& j) {
  if (!j.is_object()) return SpecInvalid("scenario spec must be an object");
  ScenarioSpec out;
  try {
    Read(j, "name", &out.name);
    if (j.contains("study_id")) {
      out.study_id = j.at("study_id").get<std::string>();
    }
    if (j.contains("em") && !j.at("em").is_null()) {
      out.em = j.at("em").get<double>();
    }
    const std::string kind = j.value("kind", std::string());
    if (kind == "rear_end") {
      RearEndSpec s;
      Read(j, "sv_speed", &s.sv_speed);
      Read(j, "lv_speed", &s.lv_speed);
      Read(j, "initial_time_gap", &s.initial_time_gap);
      Read(j, "lv_decel", &s.lv_decel);
      Read(j, "brake_onset_t", &s.brake_onset_t);
      Read(j, "lv_width", &s.lv_width);
      Read(j, "duration", &s.duration);
      Read(j, "dt", &s.dt);
      Read(j, "exit_lateral_speed", &s.exit_lateral_speed);
      if (j.contains("exit_onset_t")) {
        s.exit_onset_t = j.at("exit_onset_t").get<double>();
      }
      ReadContext(j, &s.context);
      const std::string variant = j.value("variant", std::string("S1"));
      RearEndVariant v;
      if (variant == "S1") {
        v = RearEndVariant::kS1;
      } else if (variant == "S2") {
        v = RearEndVariant::kS2;
      } else if (variant == "S3") {
        v = RearEndVariant::kS3;
      } else {
        return SpecInvalid(absl::StrCat("unknown variant '", variant, "'"));
      }
      out.spec = std::make_pair(s, v);
    } else if (kind == "cut_in") {
      CutInSpec s;
      Read(j, "sv_speed", &s.sv_speed);
      Read(j, "pov_speed", &s.pov_speed);
      Read(j, "initial_longitudinal_gap", &s.initial_longitudinal_gap);
      Read(j, "lateral_offset", &s.lateral_offset);
      Read(j, "lateral_onset_t", &s.lateral_onset_t);
      Read(j, "lateral_speed", &s.lateral_speed);
      Read(j, "lane_half_width", &s.lane_half_width);
      Read(j, "road_curvature", &s.road_curvature);
      Read(j, "pov_width", &s.pov_width);
      Read(j, "dt", &s.dt);
      Read(j, "duration", &s.duration);
      ReadContext(j, &s.context);
      out.spec = s;
    } else if (kind == "crossing") {
      CrossingSpec s;
      Read(j, "sv_speed", &s.sv_speed);
      Read(j, "pov_approach_speed", &s.pov_approach_speed);
      Read(j, "pov_start_distance_to_boundary",
           &s.pov_start_distance_to_boundary);
      Read(j, "reference_boundary", &s.reference_boundary);
      Read(j, "dt", &s.dt);
      Read(j, "duration", &s.duration);
      Read(j, "pov_width", &s.pov_width);
      Read(j, "conflict_x", &s.conflict_x);
      Read(j, "comfortable_decel", &s.comfortable_decel);
      Read(j, "stop_offset", &s.stop_offset);
      Read(j, "dwell", &s.dwell);
      Read(j, "go_speed", &s.go_speed);
      Read(j, "go_accel", &s.go_accel);
      if (j.contains("pov_decel_profile")) {
        const std::string name = j.at("pov_decel_profile").get<std::string>();
        bool found = false;
        for (const auto& [profile, label] : kProfiles) {
          if (name == label) {
            s.pov_decel_profile = profile;
            found = true;
          }
        }
        if (!found) {
          return SpecInvalid(absl::StrCat("unknown profile '", name, "'"));
        }
      }
      if (j.contains("occlusion_interval") &&
          !j.at("occlusion_interval").is_null()) {
        const json& occ = j.at("occlusion_interval");
        s.occlusion_interval = {occ.at(0).get<double>(),
                                occ.at(1).get<double>()};
      }
      out.spec = s;
    } else {
      return SpecInvalid(absl::StrCat("unknown kind '", kind, "'"));
    }
  } catch (const json::exception& e) {
    return SpecInvalid(absl::StrCat("malformed scenario spec: ", e.what()));
  }
  return out;
}

json ScenarioSpecJson(const ScenarioSpec& spec) {
  json j;
  if (!spec.name.empty()) j["name"] = spec.name;
  if (spec.study_id) j["study_id"] = *spec.study_id;
  if (spec.em) j["em"] = *spec.em;
  if (const auto* re = std::get_if<0>(&spec.spec)) {
    const RearEndSpec& s = re->first;
    j["kind"] = "rear_end";
    j["variant"] = re->second == RearEndVariant::kS1   ? "S1"
                   : re->second == RearEndVariant::kS2 ? "S2"
                                                       : "S3";
    j["sv_speed"] = s.sv_speed;
    j["lv_speed"] = s.lv_speed;
    j["initial_time_gap"] = s.initial_time_gap;
    j["lv_decel"] = s.lv_decel;
    j["brake_onset_t"] = s.brake_onset_t;
    j["lv_width"] = s.lv_width;
    j["duration"] = s.duration;
    j["dt"] = s.dt;
    j["exit_lateral_speed"] = s.exit_lateral_speed;
    if (s.exit_onset_t) j["exit_onset_t"] = *s.exit_onset_t;
    j["context"] = ContextJson(s.context);
  } else if (const auto* c = std::get_if<1>(&spec.spec)) {
    j["kind"] = "cut_in";
    j["sv_speed"] = c->sv_speed;
    j["pov_speed"] = c->pov_speed;
    j["initial_longitudinal_gap"] = c->initial_longitudinal_gap;
    j["lateral_offset"] = c->lateral_offset;
    j["lateral_onset_t"] = c->lateral_onset_t;
    j["lateral_speed"] = c->lateral_speed;
    j["lane_half_width"] = c->lane_half_width;
    j["road_curvature"] = c->road_curvature;
    j["pov_width"] = c->pov_width;
    j["dt"] = c->dt;
    j["duration"] = c->duration;
    j["context"] = ContextJson(c->context);
  } else {
    const CrossingSpec& s = std::get<2>(spec.spec);
    j["kind"] = "crossing";
    j["sv_speed"] = s.sv_speed;
    j["pov_approach_speed"] = s.pov_approach_speed;
    j["pov_start_distance_to_boundary"] = s.pov_start_distance_to_boundary;
    for (const auto& [profile, label] : kProfiles) {
      if (profile == s.pov_decel_profile) j["pov_decel_profile"] = label;
    }
    j["reference_boundary"] = s.reference_boundary;
    if (s.occlusion_interval) {
      j["occlusion_interval"] = {s.occlusion_interval->first,
                                 s.occlusion_interval->second};
    }
    j["dt"] = s.dt;
    j["duration"] = s.duration;
    j["pov_width"] = s.pov_width;
    j["conflict_x"] = s.conflict_x;
    j["comfortable_decel"] = s.comfortable_decel;
    j["stop_offset"] = s.stop_offset;
    j["dwell"] = s.dwell;
    j["go_speed"] = s.go_speed;
    j["go_accel"] = s.go_accel;
  }
  return j;
}

absl::StatusOr<KinematicTrace> Generate(const ScenarioSpec& spec,
                                        std::optional<double> dt_override) {
  return std::visit(
      [&](auto s) -> absl::StatusOr<KinematicTrace> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CutInSpec>) {
          if (dt_override) s.dt = *dt_override;
          return GenerateCutIn(s);
        } else if constexpr (std::is_same_v<T, CrossingSpec>) {
          if (dt_override) s.dt = *dt_override;
          return GenerateCrossing(s);
        } else {
          if (dt_override) s.first.dt = *dt_override;
          return GenerateRearEnd(s.first, s.second);
        }
      },
      spec.spec);
}

}  // namespace response_timing
