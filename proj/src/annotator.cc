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

#include "response_timing/annotator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absl/strings/str_cat.h"

namespace response_timing {
namespace {

constexpr std::array<std::pair<T1Rationale, std::string_view>, 8>
    kRationaleNames = {{
        {T1Rationale::kSurprisingBrakeLight, "SurprisingBrakeLight"},
        {T1Rationale::kSurprisingDecelVisible, "SurprisingDecelVisible"},
        {T1Rationale::kSurprisingLooming, "SurprisingLooming"},
        {T1Rationale::kLateralMotionOnset, "LateralMotionOnset"},
        {T1Rationale::kHeadingDeviation, "HeadingDeviation"},
        {T1Rationale::kBoundaryApproachRule, "BoundaryApproachRule"},
        {T1Rationale::kCompleteStop, "CompleteStop"},
        {T1Rationale::kAppearFromOcclusion, "AppearFromOcclusion"},
    }};

absl::Status NoConflict(std::string_view why) {
  return absl::NotFoundError(absl::StrCat("NoConflictDetected: ", std::string(why)));
}

struct Candidate {
  double t;
  T1Rationale rationale;
};

// Earliest candidate; ties go to the one listed first.
std::optional<Candidate> Earliest(
    std::initializer_list<std::optional<Candidate>> candidates) {
  std::optional<Candidate> best;
  for (const auto& c : candidates) {
    if (c && (!best || c->t < best->t)) best = c;
  }
  return best;
}

std::optional<double> ThetaDotCrossing(const LoomingSignal& looming,
                                       double threshold, double from_t) {
  return FirstCrossing(looming.theta_dot, looming.t0, looming.dt, threshold,
                       from_t);
}

// Rising edge of a brake light the annotator judged surprising.
std::optional<Candidate> SurprisingBrakeLight(const KinematicTrace& trace) {
  const ContextFlags& f = trace.flags;
  if (!f.brake_light_surprising || f.expected_slowdown_context) {
    return std::nullopt;
  }
  for (size_t i = 1; i < f.brake_light_on.size(); ++i) {
    if (f.brake_light_on[i] && !f.brake_light_on[i - 1]) {
      return Candidate{trace.TimeAt(i), T1Rationale::kSurprisingBrakeLight};
    }
  }
  return std::nullopt;
}

// Start of the first sustained surprising lead-vehicle deceleration, made
// visible once looming reaches the visibility threshold.
std::optional<Candidate> SurprisingDecelVisible(const KinematicTrace& trace,
                                                const LoomingSignal& looming,
                                                const AnnotatorConfig& cfg) {
  const bool expected = trace.flags.expected_slowdown_context;
  auto surprising = [&](double a) {
    return a < -cfg.surprising_decel || (!expected && a < -cfg.braking_eps);
  };
  const size_t n = trace.size();
  size_t i = 0;
  while (i < n) {
    if (!surprising(trace.pov[i].a)) {
      ++i;
      continue;
    }
    size_t end = i;
    while (end + 1 < n && surprising(trace.pov[end + 1].a)) ++end;
    const double duration = static_cast<double>(end - i + 1) * trace.dt;
    if (duration >= cfg.decel_debounce - 1e-9) {
      std::optional<double> visible =
          ThetaDotCrossing(looming, cfg.visibility_threshold, trace.TimeAt(i));
      if (!visible) return std::nullopt;
      return Candidate{*visible, T1Rationale::kSurprisingDecelVisible};
    }
    i = end + 1;
  }
  return std::nullopt;
}

std::optional<Candidate> CompleteStop(const KinematicTrace& trace,
                                      const AnnotatorConfig& cfg) {
  bool moving = false;
  for (size_t i = 0; i < trace.size(); ++i) {
    const double v = trace.pov[i].v;
    if (v > cfg.complete_stop_speed) {
      moving = true;
    } else if (moving) {
      return Candidate{trace.TimeAt(i), T1Rationale::kCompleteStop};
    }
  }
  return std::nullopt;
}

// T2 for the rear-end kinds: looming threshold crossing, replaced by the
// extrapolated crossing when the response came first.
absl::Status RearEndT2(const LoomingSignal& looming,
                       const AnnotatorConfig& cfg, std::optional<double> em,
                       Annotation* out) {
  const std::optional<double> crossing =
      ThetaDotCrossing(looming, cfg.t2_looming_threshold, out->t1);
  if (em && *em > out->t1 && (!crossing || *crossing > *em)) {
    absl::StatusOr<std::optional<double>> extrapolated =
        ExtrapolateT2(looming, out->t1, *em, cfg);
    if (extrapolated.ok()) {
      out->t2 = extrapolated->value_or(out->t1);
      out->extrapolated_t2 = extrapolated->has_value();
      return absl::OkStatus();
    }
  }
  out->t2 = crossing.value_or(out->t1);
  return absl::OkStatus();
}

absl::StatusOr<Annotation> AnnotateRearEnd(const KinematicTrace& trace,
                                           const LoomingSignal& looming,
                                           const AnnotatorConfig& cfg,
                                           std::optional<double> em) {
  if (looming.size() == 0) {
    return absl::InvalidArgumentError("rear-end annotation needs looming");
  }
  std::optional<Candidate> t1;
  switch (trace.scenario_kind) {
    case ScenarioKind::kS1:
      t1 = Earliest({SurprisingBrakeLight(trace),
                     SurprisingDecelVisible(trace, looming, cfg)});
      break;
    case ScenarioKind::kS2:
      t1 = Earliest({SurprisingBrakeLight(trace),
                     SurprisingDecelVisible(trace, looming, cfg),
                     CompleteStop(trace, cfg)});
      break;
    case ScenarioKind::kS3: {
      std::optional<double> visible =
          ThetaDotCrossing(looming, cfg.visibility_threshold, looming.t0);
      if (visible) t1 = Candidate{*visible, T1Rationale::kSurprisingLooming};
      break;
    }
    default:
      break;
  }
  if (!t1) {
    return NoConflict(absl::StrCat("no stimulus-onset rule fired for ",
                                   std::string(ScenarioKindName(trace.scenario_kind))));
  }
  Annotation out;
  out.t1 = t1->t;
  out.t1_rationale = t1->rationale;
  if (absl::Status s = RearEndT2(looming, cfg, em, &out); !s.ok()) return s;
  return out;
}

absl::StatusOr<Annotation> AnnotateCutIn(const KinematicTrace& trace,
                                         const AnnotatorConfig& cfg) {
  if (!trace.lane) {
    return absl::InvalidArgumentError("cut-in annotation needs lane geometry");
  }
  const std::vector<double> d = PovLaneLateral(trace);
  const double curvature = trace.lane->road_curvature;
  const size_t n = d.size();
  std::optional<Candidate> t1;
  if (std::abs(curvature) < 1e-9) {
    for (size_t i = 0; i < n && !t1; ++i) {
      const size_t lo = i == 0 ? 0 : i - 1;
      const size_t hi = std::min(i + 1, n - 1);
      const double toward =
          -(d[hi] - d[lo]) / (static_cast<double>(hi - lo) * trace.dt);
      if (toward > cfg.lat_v_eps) {
        t1 = Candidate{trace.TimeAt(i), T1Rationale::kLateralMotionOnset};
      }
    }
  } else {
    for (size_t i = 0; i < n && !t1; ++i) {
      const AgentState& p = trace.pov[i];
      const double tangent = ToLaneFrame(p.x, p.y, curvature).tangent_heading;
      const double toward = -std::remainder(p.heading - tangent,
                                            2.0 * std::acos(-1.0));
      if (toward > cfg.heading_eps) {
        t1 = Candidate{trace.TimeAt(i), T1Rationale::kHeadingDeviation};
      }
    }
  }
  if (!t1) return NoConflict("POV never moved towards the SV lane");

  std::vector<double> inside(n);
  for (size_t i = 0; i < n; ++i) inside[i] = -d[i];
  Annotation out;
  out.t1 = t1->t;
  out.t1_rationale = t1->rationale;
  out.t2 = FirstCrossing(inside, trace.t0, trace.dt, -trace.lane->boundary_y,
                         out.t1)
               .value_or(out.t1);
  return out;
}

// First visible time at or after t, or nothing if occluded to the end.
std::optional<double> FirstVisible(const KinematicTrace& trace, double t) {
  const auto& occ = trace.flags.occluded;
  size_t i = static_cast<size_t>(
      std::max(0.0, std::floor((t - trace.t0) / trace.dt + 1e-9)));
  if (i < occ.size() && !occ[i]) return t;
  for (; i < occ.size(); ++i) {
    if (!occ[i]) return std::max(t, trace.TimeAt(i));
  }
  return std::nullopt;
}

absl::StatusOr<Annotation> AnnotateCrossing(const KinematicTrace& trace,
                                            const AnnotatorConfig& cfg) {
  if (!trace.lane) {
    return absl::InvalidArgumentError(
        "crossing-path annotation needs the reference boundary");
  }
  const std::vector<double> d = PovLaneLateral(trace);
  const size_t n = d.size();
  std::vector<double> dist(n), speed(n), closing(n);
  for (size_t i = 0; i < n; ++i) {
    dist[i] = d[i] - trace.lane->boundary_y;
    speed[i] = trace.pov[i].v;
    closing[i] = -dist[i];
  }

  // Stationary near the boundary, then moving off at >= 1 m/s.
  std::optional<double> start_rule;
  for (size_t j = 0; j < n; ++j) {
    if (speed[j] <= cfg.stationary_speed && dist[j] >= 0.0 &&
        dist[j] <= cfg.boundary_proximity) {
      start_rule = FirstCrossing(speed, trace.t0, trace.dt,
                                 cfg.crossing_start_speed, trace.TimeAt(j));
      break;
    }
  }
  // Entering the proximity band without slowing down.
  std::optional<double> entry_rule;
  if (std::optional<double> t_entry =
          FirstCrossing(closing, trace.t0, trace.dt, -cfg.boundary_proximity,
                        trace.t0)) {
    const size_t i = std::min(
        n - 1, static_cast<size_t>(std::ceil((*t_entry - trace.t0) /
                                                 trace.dt - 1e-9)));
    bool stopped_before = false;
    for (size_t j = 0; j <= i; ++j) {
      stopped_before |= speed[j] <= cfg.stationary_speed;
    }
    if (!stopped_before && trace.pov[i].a >= -cfg.braking_eps) {
      entry_rule = t_entry;
    }
  }
  // Unusually hard braking (strictly above the threshold) needed to stop
  // short of the boundary.
  std::optional<double> decel_rule;
  {
    double prev = 0.0;
    for (size_t i = 0; i < n && dist[i] > 0.0; ++i) {
      const double required = *RequiredDecel(speed[i], dist[i]);
      if (required > cfg.required_decel_threshold) {
        const double threshold = cfg.required_decel_threshold;
        const double w = i == 0 ? 1.0 : (threshold - prev) / (required - prev);
        decel_rule = trace.TimeAt(i) - (1.0 - std::clamp(w, 0.0, 1.0)) *
                                           (i == 0 ? 0.0 : trace.dt);
        break;
      }
      prev = required;
    }
  }

  std::optional<double> raw;
  for (const auto& t : {start_rule, entry_rule, decel_rule}) {
    if (t && (!raw || *t < *raw)) raw = t;
  }
  if (!raw) return NoConflict("POV yields to the reference boundary");

  Annotation out;
  const std::optional<double> visible = FirstVisible(trace, *raw);
  if (!visible) return NoConflict("POV occluded until the end of the trace");
  out.t1 = *visible;
  out.t1_rationale = *visible > *raw ? T1Rationale::kAppearFromOcclusion
                                     : T1Rationale::kBoundaryApproachRule;

  std::optional<double> crossing =
      FirstCrossing(closing, trace.t0, trace.dt, 0.0, trace.t0);
  if (crossing) crossing = FirstVisible(trace, *crossing);
  out.t2 = std::max(out.t1, crossing.value_or(out.t1));
  return out;
}

}  // namespace

std::string_view T1RationaleName(T1Rationale rationale) {
  for (const auto& [r, name] : kRationaleNames) {
    if (r == rationale) return name;
  }
  return "";
}

absl::StatusOr<T1Rationale> ParseT1Rationale(std::string_view name) {
  for (const auto& [r, n] : kRationaleNames) {
    if (n == name) return r;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown t1_rationale '", std::string(name), "'"));
}

absl::StatusOr<double> RequiredDecel(double speed, double distance) {
  if (!(distance > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("NonPositiveDistance: ", distance, " m"));
  }
  return speed * speed / (2.0 * distance);
}

absl::StatusOr<std::optional<double>> ExtrapolateT2(
    const LoomingSignal& looming, double t1, double em,
    const AnnotatorConfig& config) {
  if (!(em > t1)) {
    return absl::InvalidArgumentError("extrapolation needs em > t1");
  }
  const double lo = t1 - config.extrapolation_lookback;
  const double tol = 1e-9 * looming.dt;
  std::vector<double> times, values;
  const bool use_theta =
      config.extrapolation_signal == ExtrapolationSignal::kTheta;
  for (size_t i = 0; i < looming.size(); ++i) {
    const double t = looming.TimeAt(i);
    if (t < lo - tol || t > em + tol) continue;
    times.push_back(t - t1);
    values.push_back(use_theta ? looming.theta[i] : looming.theta_dot[i]);
  }
  if (times.size() < 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "WindowTooShort: ", times.size(), " samples in [", lo, ", ", em,
        "]"));
  }

  Eigen::MatrixXd design(static_cast<Eigen::Index>(times.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(times.size()));
  for (size_t i = 0; i < times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = times[i];
    design(r, 2) = times[i] * times[i];
    rhs(r) = values[i];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);

  // Fitted looming as c0 + c1 * u + c2 * u^2 with u = t - t1.
  double c0 = coef(0), c1 = coef(1), c2 = coef(2);
  if (use_theta) {
    c0 = coef(1);
    c1 = 2.0 * coef(2);
    c2 = 0.0;
  }
  const double threshold = config.t2_looming_threshold;
  if (c0 >= threshold) return std::optional<double>(t1);

  // Smallest root of c2 u^2 + c1 u + (c0 - threshold) with u > 0.
  const double c = c0 - threshold;
  std::optional<double> root;
  auto consider = [&](double u) {
    if (u > 0.0 && (!root || u < *root)) root = u;
  };
  const double scale = std::max({std::abs(c1), std::abs(c), 1e-300});
  if (std::abs(c2) * config.extrapolation_horizon < 1e-12 * scale) {
    if (c1 != 0.0) consider(-c / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double q = -0.5 * (c1 + std::copysign(sq, c1));
      if (q != 0.0) {
        consider(q / c2);
        consider(c / q);
      } else {
        consider(0.0);
      }
    }
  }
  if (!root || *root > config.extrapolation_horizon) {
    return std::optional<double>();
  }
  return std::optional<double>(t1 + *root);
}

void SetEvasiveManeuver(Annotation* annotation, std::optional<double> em) {
  annotation->em = em;
  annotation->rsp_t.reset();
  if (em && *em >= annotation->t1) annotation->rsp_t = *em - annotation->t1;
}

absl::StatusOr<Annotation> Annotate(const KinematicTrace& trace,
                                    const LoomingSignal& looming,
                                    const AnnotatorConfig& config,
                                    std::optional<double> em) {
  absl::StatusOr<Annotation> out;
  switch (trace.scenario_kind) {
    case ScenarioKind::kS1:
    case ScenarioKind::kS2:
    case ScenarioKind::kS3:
      out = AnnotateRearEnd(trace, looming, config, em);
      break;
    case ScenarioKind::kCutIn:
      out = AnnotateCutIn(trace, config);
      break;
    case ScenarioKind::kCrossingPath:
      out = AnnotateCrossing(trace, config);
      break;
    case ScenarioKind::kUnknown:
      return absl::InvalidArgumentError(
          "ScenarioUnknown: trace has no scenario kind");
  }
  if (!out.ok()) return out;
  out->t2 = std::max(out->t2, out->t1);
  out->rut = out->t2 - out->t1;
  SetEvasiveManeuver(&*out, em);
  return out;
}

nlohmann::json AnnotationJson(const Annotation& a) {
  nlohmann::json j;
  j["t1"] = a.t1;
  j["t2"] = a.t2;
  j["rut"] = a.rut;
  j["em"] = a.em ? nlohmann::json(*a.em) : nlohmann::json(nullptr);
  j["rsp_t"] = a.rsp_t ? nlohmann::json(*a.rsp_t) : nlohmann::json(nullptr);
  j["t1_rationale"] = std::string(T1RationaleName(a.t1_rationale));
  j["extrapolated_t2"] = a.extrapolated_t2;
  return j;
}

absl::StatusOr<Annotation> ParseAnnotationJson(const nlohmann::json& j) {
  Annotation a;
  try {
    a.t1 = j.at("t1").get<double>();
    a.t2 = j.at("t2").get<double>();
    a.rut = j.at("rut").get<double>();
    if (j.contains("em") && !j.at("em").is_null()) {
      a.em = j.at("em").get<double>();
    }
    if (j.contains("rsp_t") && !j.at("rsp_t").is_null()) {
      a.rsp_t = j.at("rsp_t").get<double>();
    }
    absl::StatusOr<T1Rationale> r =
        ParseT1Rationale(j.at("t1_rationale").get<std::string>());
    if (!r.ok()) return r.status();
    a.t1_rationale = *r;
    a.extrapolated_t2 = j.value("extrapolated_t2", false);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed annotation: ", e.what()));
  }
  return a;
}

}  // namespace response_timing
