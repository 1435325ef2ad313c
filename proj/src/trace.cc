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

#include "response_timing/trace.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"

namespace response_timing {
namespace {

constexpr double kStraightCurvature = 1e-12;
// Relative tolerance when checking that CSV timestamps are uniform.
constexpr double kUniformTolerance = 1e-6;

constexpr std::array<std::string_view, 12> kRequiredColumns = {
    "t",     "sv_x",  "sv_y",  "sv_v",      "sv_a",           "pov_x",
    "pov_y", "pov_v", "pov_a", "pov_width", "brake_light_on", "occluded"};

struct ScenarioName {
  ScenarioKind kind;
  std::string_view name;
};
constexpr std::array<ScenarioName, 6> kScenarioNames = {{
    {ScenarioKind::kS1, "S1"},
    {ScenarioKind::kS2, "S2"},
    {ScenarioKind::kS3, "S3"},
    {ScenarioKind::kCutIn, "CutIn"},
    {ScenarioKind::kCrossingPath, "CrossingPath"},
    {ScenarioKind::kUnknown, "Unknown"},
}};

void CheckAgent(const std::vector<AgentState>& states, std::string_view who,
                std::vector<Violation>* out) {
  for (size_t i = 0; i < states.size(); ++i) {
    const AgentState& s = states[i];
    const std::array<std::pair<std::string_view, double>, 5> fields = {
        {{"x", s.x}, {"y", s.y}, {"v", s.v}, {"a", s.a}, {"heading",
                                                          s.heading}}};
    for (const auto& [name, value] : fields) {
      if (!std::isfinite(value)) {
        out->push_back({absl::StrCat(std::string(who), ".", std::string(name)), i,
                        "non-finite value"});
      }
    }
    if (s.v < 0.0) {
      out->push_back({absl::StrCat(std::string(who), ".v"), i,
                      absl::StrCat("negative speed ", s.v)});
    }
    if (std::abs(s.a) > kMaxAbsAcceleration) {
      out->push_back({absl::StrCat(std::string(who), ".a"), i,
                      absl::StrCat("|a| = ", std::abs(s.a), " exceeds ",
                                   kMaxAbsAcceleration)});
    }
  }
}

AgentState Lerp(const AgentState& a, const AgentState& b, double w) {
  auto mix = [w](double p, double q) { return p + (q - p) * w; };
  return {mix(a.x, b.x), mix(a.y, b.y), mix(a.v, b.v), mix(a.a, b.a),
          mix(a.heading, b.heading)};
}

}  // namespace

std::string_view ScenarioKindName(ScenarioKind kind) {
  for (const auto& entry : kScenarioNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "Unknown";
}

absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name) {
  for (const auto& entry : kScenarioNames) {
    if (entry.name == name) return entry.kind;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown scenario_kind '", std::string(name), "'"));
}

std::vector<Violation> ValidateTrace(const KinematicTrace& trace) {
  std::vector<Violation> out;
  if (!(trace.dt > 0.0) || !std::isfinite(trace.dt)) {
    out.push_back({"dt", std::nullopt, "dt must be positive"});
  }
  if (!std::isfinite(trace.t0)) {
    out.push_back({"t0", std::nullopt, "t0 must be finite"});
  }
  if (trace.sv.size() != trace.pov.size()) {
    out.push_back({"pov", std::nullopt,
                   absl::StrCat("sv has ", trace.sv.size(), " samples, pov ",
                                trace.pov.size())});
  }
  if (trace.sv.size() < 2) {
    out.push_back({"sv", std::nullopt, "at least two samples required"});
  }
  if (!(trace.pov_width > 0.0)) {
    out.push_back({"pov_width", std::nullopt,
                   absl::StrCat("pov_width must be positive, got ",
                                trace.pov_width)});
  }
  const size_t n = trace.sv.size();
  if (trace.flags.brake_light_on.size() != n) {
    out.push_back({"flags.brake_light_on", std::nullopt,
                   "flag series must cover every sample"});
  }
  if (trace.flags.occluded.size() != n) {
    out.push_back({"flags.occluded", std::nullopt,
                   "flag series must cover every sample"});
  }
  CheckAgent(trace.sv, "sv", &out);
  CheckAgent(trace.pov, "pov", &out);
  return out;
}

LanePoint ToLaneFrame(double x, double y, double road_curvature) {
  const double k = road_curvature;
  if (std::abs(k) < kStraightCurvature) return {x, y, 0.0};
  const double phi = std::atan2(k * x, 1.0 - k * y);
  const double radial = std::hypot(k * x, 1.0 - k * y);
  return {phi / k, (1.0 - radial) / k, phi};
}

void FromLaneFrame(double s, double d, double road_curvature, double* x,
                   double* y) {
  const double k = road_curvature;
  if (std::abs(k) < kStraightCurvature) {
    *x = s;
    *y = d;
    return;
  }
  const double phi = k * s;
  const double scale = 1.0 - k * d;
  *x = std::sin(phi) * scale / k;
  *y = (1.0 - std::cos(phi) * scale) / k;
}

std::vector<double> PovLaneLateral(const KinematicTrace& trace) {
  const double k = trace.lane ? trace.lane->road_curvature : 0.0;
  std::vector<double> out;
  out.reserve(trace.pov.size());
  for (const AgentState& s : trace.pov) {
    out.push_back(ToLaneFrame(s.x, s.y, k).d);
  }
  return out;
}

absl::StatusOr<KinematicTrace> ParseTraceCsv(std::string_view text) {
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) return table.status();

  std::array<size_t, kRequiredColumns.size()> col{};
  for (size_t c = 0; c < kRequiredColumns.size(); ++c) {
    std::optional<size_t> idx = table->Column(kRequiredColumns[c]);
    if (!idx) {
      return absl::InvalidArgumentError(absl::StrCat(
          "MissingColumn: column '", std::string(kRequiredColumns[c]), "' not in header"));
    }
    col[c] = *idx;
  }
  const std::optional<size_t> sv_heading = table->Column("sv_heading");
  const std::optional<size_t> pov_heading = table->Column("pov_heading");

  KinematicTrace trace;
  std::vector<double> times;
  const size_t n = table->rows.size();
  trace.sv.resize(n);
  trace.pov.resize(n);
  trace.flags.brake_light_on.resize(n);
  trace.flags.occluded.resize(n);
  for (size_t r = 0; r < n; ++r) {
    const std::vector<std::string>& row = table->rows[r];
    auto number = [&](size_t c,
                      std::string_view name) -> absl::StatusOr<double> {
      if (c >= row.size()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "MissingColumn: row ", r, " has no value for column '", std::string(name),
            "'"));
      }
      std::optional<double> v = ParseDouble(row[c]);
      if (!v) {
        return absl::InvalidArgumentError(absl::StrCat(
            "bad number '", row[c], "' in row ", r, " column '", std::string(name), "'"));
      }
      if (std::isnan(*v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("NaNValue: row ", r, " column '", std::string(name), "'"));
      }
      return *v;
    };
    std::array<double, 10> values{};
    for (size_t c = 0; c < 10; ++c) {
      absl::StatusOr<double> v = number(col[c], kRequiredColumns[c]);
      if (!v.ok()) return v.status();
      values[c] = *v;
    }
    for (size_t c = 10; c < 12; ++c) {
      const size_t idx = col[c];
      std::optional<bool> b =
          idx < row.size() ? ParseBool(row[idx]) : std::nullopt;
      if (!b) {
        return absl::InvalidArgumentError(absl::StrCat(
            "bad boolean in row ", r, " column '", std::string(kRequiredColumns[c]), "'"));
      }
      (c == 10 ? trace.flags.brake_light_on : trace.flags.occluded)[r] = *b;
    }
    times.push_back(values[0]);
    trace.sv[r] = {values[1], values[2], values[3], values[4], 0.0};
    trace.pov[r] = {values[5], values[6], values[7], values[8], 0.0};
    if (sv_heading) {
      absl::StatusOr<double> h = number(*sv_heading, "sv_heading");
      if (!h.ok()) return h.status();
      trace.sv[r].heading = *h;
    }
    if (pov_heading) {
      absl::StatusOr<double> h = number(*pov_heading, "pov_heading");
      if (!h.ok()) return h.status();
      trace.pov[r].heading = *h;
    }
    if (r == 0) trace.pov_width = values[9];
  }

  for (size_t r = 1; r < n; ++r) {
    if (!(times[r] > times[r - 1])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "NonMonotonicTime: row ", r, " has t = ", times[r],
          " after t = ", times[r - 1]));
    }
  }
  if (n >= 2) {
    trace.t0 = times.front();
    trace.dt = (times.back() - times.front()) / static_cast<double>(n - 1);
    for (size_t r = 1; r < n; ++r) {
      const double step = times[r] - times[r - 1];
      if (std::abs(step - trace.dt) > kUniformTolerance * trace.dt +
                                          1e-9) {
        return absl::InvalidArgumentError(absl::StrCat(
            "NonUniformTime: row ", r, " step ", step, " differs from dt ",
            trace.dt));
      }
    }
  } else if (n == 1) {
    trace.t0 = times.front();
  }
  return trace;
}

std::string FormatTraceCsv(const KinematicTrace& trace) {
  std::string out =
      "t,sv_x,sv_y,sv_v,sv_a,pov_x,pov_y,pov_v,pov_a,pov_width,"
      "brake_light_on,occluded,sv_heading,pov_heading\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    const AgentState& s = trace.sv[i];
    const AgentState& p = trace.pov[i];
    const bool brake = i < trace.flags.brake_light_on.size() &&
                       trace.flags.brake_light_on[i];
    const bool occluded =
        i < trace.flags.occluded.size() && trace.flags.occluded[i];
    absl::StrAppend(&out, FormatDouble(trace.TimeAt(i)), ",",
                    FormatDouble(s.x), ",", FormatDouble(s.y), ",",
                    FormatDouble(s.v), ",", FormatDouble(s.a), ",",
                    FormatDouble(p.x), ",", FormatDouble(p.y), ",",
                    FormatDouble(p.v), ",", FormatDouble(p.a), ",",
                    FormatDouble(trace.pov_width), ",", brake ? 1 : 0, ",",
                    occluded ? 1 : 0, ",", FormatDouble(s.heading), ",",
                    FormatDouble(p.heading), "\n");
  }
  return out;
}

nlohmann::json SidecarJson(const KinematicTrace& trace) {
  nlohmann::json j;
  j["scenario_kind"] = std::string(ScenarioKindName(trace.scenario_kind));
  j["brake_light_surprising"] = trace.flags.brake_light_surprising;
  j["expected_slowdown_context"] = trace.flags.expected_slowdown_context;
  j["eyes_off_path"] = trace.flags.eyes_off_path;
  j["impaired"] = trace.flags.impaired;
  if (trace.lane) {
    j["lane"] = {{"boundary_y", trace.lane->boundary_y},
                 {"road_curvature", trace.lane->road_curvature}};
  }
  return j;
}

absl::Status ApplySidecar(const nlohmann::json& sidecar,
                          KinematicTrace* trace) {
  if (!sidecar.is_object()) {
    return absl::InvalidArgumentError("sidecar must be a JSON object");
  }
  try {
    if (sidecar.contains("scenario_kind")) {
      absl::StatusOr<ScenarioKind> kind =
          ParseScenarioKind(sidecar.at("scenario_kind").get<std::string>());
      if (!kind.ok()) return kind.status();
      trace->scenario_kind = *kind;
    }
    auto flag = [&](const char* key, bool* dst) {
      if (sidecar.contains(key)) *dst = sidecar.at(key).get<bool>();
    };
    flag("brake_light_surprising", &trace->flags.brake_light_surprising);
    flag("expected_slowdown_context",
         &trace->flags.expected_slowdown_context);
    flag("eyes_off_path", &trace->flags.eyes_off_path);
    flag("impaired", &trace->flags.impaired);
    if (sidecar.contains("lane")) {
      const nlohmann::json& lane = sidecar.at("lane");
      LaneGeometry geometry;
      geometry.boundary_y = lane.at("boundary_y").get<double>();
      geometry.road_curvature = lane.value("road_curvature", 0.0);
      trace->lane = geometry;
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed sidecar: ", e.what()));
  }
  return absl::OkStatus();
}

std::filesystem::path DefaultSidecarPath(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".json");
  return p;
}

absl::StatusOr<KinematicTrace> LoadTrace(
    const std::filesystem::path& csv,
    std::optional<std::filesystem::path> sidecar) {
  absl::StatusOr<std::string> text = ReadFile(csv);
  if (!text.ok()) return text.status();
  absl::StatusOr<KinematicTrace> trace = ParseTraceCsv(*text);
  if (!trace.ok()) {
    return absl::Status(trace.status().code(),
                        absl::StrCat(csv.string(), ": ",
                                     trace.status().message()));
  }
  const bool explicit_sidecar = sidecar.has_value();
  const std::filesystem::path side =
      sidecar.value_or(DefaultSidecarPath(csv));
  if (std::filesystem::exists(side)) {
    absl::StatusOr<std::string> side_text = ReadFile(side);
    if (!side_text.ok()) return side_text.status();
    nlohmann::json j = nlohmann::json::parse(*side_text, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat(side.string(), ": invalid JSON"));
    }
    absl::Status s = ApplySidecar(j, &*trace);
    if (!s.ok()) return s;
  } else if (explicit_sidecar) {
    return absl::NotFoundError(
        absl::StrCat("sidecar not found: ", side.string()));
  }
  std::vector<Violation> violations = ValidateTrace(*trace);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    return absl::InvalidArgumentError(absl::StrCat(
        csv.string(), ": invalid trace: ", v.field,
        v.index ? absl::StrCat("[", *v.index, "]") : "", ": ", v.message));
  }
  return trace;
}

absl::Status SaveTrace(const KinematicTrace& trace,
                       const std::filesystem::path& csv,
                       std::optional<std::filesystem::path> sidecar) {
  absl::Status s = WriteFileAtomic(csv, FormatTraceCsv(trace));
  if (!s.ok()) return s;
  return WriteFileAtomic(sidecar.value_or(DefaultSidecarPath(csv)),
                         SidecarJson(trace).dump(2) + "\n");
}

absl::StatusOr<KinematicTrace> Resample(const KinematicTrace& trace,
                                        double dt_new) {
  if (trace.size() == 0) {
    return absl::InvalidArgumentError("EmptyTrace: nothing to resample");
  }
  if (!(dt_new > 0.0)) {
    return absl::InvalidArgumentError("dt_new must be positive");
  }
  const double span = trace.EndTime() - trace.t0;
  const size_t n_new =
      static_cast<size_t>(std::floor(span / dt_new + 1e-9)) + 1;

  KinematicTrace out = trace;
  out.dt = dt_new;
  out.sv.assign(n_new, {});
  out.pov.assign(n_new, {});
  out.flags.brake_light_on.assign(n_new, false);
  out.flags.occluded.assign(n_new, false);
  const size_t last = trace.size() - 1;
  for (size_t i = 0; i < n_new; ++i) {
    const double pos = static_cast<double>(i) * dt_new / trace.dt;
    size_t lo = static_cast<size_t>(std::floor(pos + 1e-9));
    lo = std::min(lo, last);
    double w = pos - static_cast<double>(lo);
    if (std::abs(w) < 1e-9 || lo == last) w = 0.0;
    const size_t hi = std::min(lo + 1, last);
    out.sv[i] = Lerp(trace.sv[lo], trace.sv[hi], w);
    out.pov[i] = Lerp(trace.pov[lo], trace.pov[hi], w);
    if (lo < trace.flags.brake_light_on.size()) {
      out.flags.brake_light_on[i] = trace.flags.brake_light_on[lo];
    }
    if (lo < trace.flags.occluded.size()) {
      out.flags.occluded[i] = trace.flags.occluded[lo];
    }
  }
  return out;
}

}  // namespace response_timing
