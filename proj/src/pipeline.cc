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

#include "response_timing/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "response_timing/csv.h"
#include "response_timing/looming.h"
#include "response_timing/rng.h"
#include "response_timing/scenario_sim.h"

namespace response_timing {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

absl::Status StageError(std::string_view stage, const fs::path& file,
                        const absl::Status& status) {
  return absl::Status(status.code(),
                      absl::StrCat("stage '", std::string(stage), "' on ",
                                   file.string(), ": ", status.message()));
}

absl::Status WriteJson(const fs::path& path, const json& j) {
  return WriteFileAtomic(path, j.dump(2) + "\n");
}

bool IsRearEnd(ScenarioKind kind) {
  return kind == ScenarioKind::kS1 || kind == ScenarioKind::kS2 ||
         kind == ScenarioKind::kS3;
}

// Double-valued annotator settings by JSON key.
struct AnnotatorField {
  const char* key;
  double AnnotatorConfig::*field;
};

constexpr AnnotatorField kAnnotatorFields[] = {
    {"t2_looming_threshold", &AnnotatorConfig::t2_looming_threshold},
    {"visibility_threshold", &AnnotatorConfig::visibility_threshold},
    {"surprising_decel", &AnnotatorConfig::surprising_decel},
    {"braking_eps", &AnnotatorConfig::braking_eps},
    {"decel_debounce", &AnnotatorConfig::decel_debounce},
    {"complete_stop_speed", &AnnotatorConfig::complete_stop_speed},
    {"lat_v_eps", &AnnotatorConfig::lat_v_eps},
    {"heading_eps", &AnnotatorConfig::heading_eps},
    {"boundary_proximity", &AnnotatorConfig::boundary_proximity},
    {"crossing_start_speed", &AnnotatorConfig::crossing_start_speed},
    {"stationary_speed", &AnnotatorConfig::stationary_speed},
    {"required_decel_threshold", &AnnotatorConfig::required_decel_threshold},
    {"extrapolation_lookback", &AnnotatorConfig::extrapolation_lookback},
    {"extrapolation_horizon", &AnnotatorConfig::extrapolation_horizon},
};

}  // namespace

uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ConfigHash(const json& config) {
  return absl::StrFormat("%016x", Fnv1a64(config.dump()));
}

json ManifestJson(const RunManifest& m) {
  return {{"command", m.command},
          {"inputs", m.inputs},
          {"outputs", m.outputs},
          {"seed", m.seed},
          {"config_hash", m.config_hash},
          {"tool_version", m.tool_version}};
}

absl::Status WriteManifest(const fs::path& dir, const RunManifest& manifest) {
  return WriteJson(dir / "manifest.json", ManifestJson(manifest));
}

absl::StatusOr<AnnotatorConfig> ParseAnnotatorConfigJson(const json& j) {
  AnnotatorConfig c;
  try {
    for (const auto& f : kAnnotatorFields) {
      c.*f.field = j.value(f.key, c.*f.field);
    }
    if (j.contains("extrapolation_signal")) {
      const std::string s = j.at("extrapolation_signal").get<std::string>();
      if (s == "theta_dot") {
        c.extrapolation_signal = ExtrapolationSignal::kThetaDot;
      } else if (s == "theta") {
        c.extrapolation_signal = ExtrapolationSignal::kTheta;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown extrapolation_signal '", s, "'"));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed annotator config: ", e.what()));
  }
  return c;
}

json AnnotatorConfigJson(const AnnotatorConfig& c) {
  json j;
  for (const auto& f : kAnnotatorFields) j[f.key] = c.*f.field;
  j["extrapolation_signal"] =
      c.extrapolation_signal == ExtrapolationSignal::kTheta ? "theta"
                                                            : "theta_dot";
  return j;
}

absl::StatusOr<PipelineConfig> ParsePipelineConfigJson(const json& j) {
  PipelineConfig c;
  if (!j.is_object()) {
    return absl::InvalidArgumentError("pipeline config must be an object");
  }
  try {
    if (j.contains("annotator")) {
      absl::StatusOr<AnnotatorConfig> a =
          ParseAnnotatorConfigJson(j.at("annotator"));
      if (!a.ok()) return a.status();
      c.annotator = *a;
    }
    if (j.contains("accumulator")) {
      absl::StatusOr<AccumulatorParams> p =
          ParseAccumulatorParamsJson(j.at("accumulator"));
      if (!p.ok()) return p.status();
      c.accumulator = *p;
    }
    if (j.contains("lateral_prior")) {
      absl::StatusOr<BeliefPrior> p = ParseBeliefPriorJson(j.at("lateral_prior"));
      if (!p.ok()) return p.status();
      c.lateral_prior = *p;
    }
    if (j.contains("looming_prior")) {
      absl::StatusOr<BeliefPrior> p = ParseBeliefPriorJson(j.at("looming_prior"));
      if (!p.ok()) return p.status();
      c.looming_prior = *p;
    }
    if (j.contains("dt") && !j.at("dt").is_null()) {
      c.dt = j.at("dt").get<double>();
      if (!(*c.dt > 0.0)) {
        return absl::InvalidArgumentError("dt must be positive");
      }
    }
    c.looming_window = j.value("looming_window", c.looming_window);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed pipeline config: ", e.what()));
  }
  return c;
}

json PipelineConfigJson(const PipelineConfig& c) {
  return {{"annotator", AnnotatorConfigJson(c.annotator)},
          {"accumulator", AccumulatorParamsJson(c.accumulator)},
          {"lateral_prior", BeliefPriorJson(c.lateral_prior)},
          {"looming_prior", BeliefPriorJson(c.looming_prior)},
          {"dt", c.dt ? json(*c.dt) : json(nullptr)},
          {"looming_window", c.looming_window}};
}

absl::StatusOr<std::vector<fs::path>> ListSpecFiles(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    return absl::FailedPreconditionError(
        absl::StrCat("spec directory ", dir.string(), " does not exist"));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (ec) {
    return absl::FailedPreconditionError(
        absl::StrCat("cannot list ", dir.string(), ": ", ec.message()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

absl::StatusOr<RunManifest> RunPipeline(const fs::path& spec_dir,
                                        const fs::path& out_dir, uint64_t seed,
                                        const PipelineConfig& config) {
  absl::StatusOr<std::vector<fs::path>> files = ListSpecFiles(spec_dir);
  if (!files.ok()) return files.status();
  if (files->empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "no scenario spec (*.json) in ", spec_dir.string()));
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", out_dir.string(), ": ", ec.message()));
  }

  RunManifest manifest;
  manifest.command = "pipeline";
  manifest.seed = seed;
  manifest.config_hash = ConfigHash(PipelineConfigJson(config));

  std::vector<RutRspPoint> points;
  std::vector<ValidationRow> study_rows;
  std::set<std::string> used_names;

  for (size_t idx = 0; idx < files->size(); ++idx) {
    const fs::path& file = (*files)[idx];
    manifest.inputs.push_back(file.filename().string());
    const std::string name = file.stem().string();
    const fs::path dir = out_dir / name;
    fs::create_directories(dir, ec);
    if (ec) {
      return StageError("output", file,
                        absl::InternalError(ec.message()));
    }
    auto record = [&](std::string_view leaf) {
      manifest.outputs.push_back(absl::StrCat(name, "/", std::string(leaf)));
      return dir / std::string(leaf);
    };

    absl::StatusOr<std::string> text = ReadFile(file);
    if (!text.ok()) return StageError("read", file, text.status());
    json j = json::parse(*text, nullptr, false);
    if (j.is_discarded()) {
      return StageError("read", file,
                        absl::InvalidArgumentError("invalid JSON"));
    }
    absl::StatusOr<ScenarioSpec> spec = ParseScenarioSpec(j);
    if (!spec.ok()) return StageError("parse", file, spec.status());

    absl::StatusOr<KinematicTrace> trace = Generate(*spec, config.dt);
    if (!trace.ok()) return StageError("simulate", file, trace.status());
    if (absl::Status s = SaveTrace(*trace, record("trace.csv"),
                                   dir / "trace.json");
        !s.ok()) {
      return StageError("simulate", file, s);
    }
    manifest.outputs.push_back(absl::StrCat(name, "/trace.json"));

    const bool rear_end = IsRearEnd(trace->scenario_kind);
    LoomingSignal looming;
    absl::StatusOr<LoomingSignal> loom =
        ComputeLooming(*trace, config.looming_window);
    if (loom.ok()) {
      looming = *std::move(loom);
      if (absl::Status s =
              WriteFileAtomic(record("looming.csv"), FormatLoomingCsv(looming));
          !s.ok()) {
        return StageError("loom", file, s);
      }
    } else if (rear_end) {
      return StageError("loom", file, loom.status());
    }

    const BeliefPrior& prior =
        rear_end ? config.looming_prior : config.lateral_prior;
    const Observable observable =
        rear_end ? Observable::kThetaDot : Observable::kLateralY;
    absl::StatusOr<SurpriseSeries> surprise =
        ComputeSurpriseSeries(prior, *trace, observable);
    if (!surprise.ok()) return StageError("surprise", file, surprise.status());
    if (absl::Status s =
            WriteFileAtomic(record("surprise.csv"), FormatSurpriseCsv(*surprise));
        !s.ok()) {
      return StageError("surprise", file, s);
    }

    const double baseline = DefaultBaseline(*surprise);
    absl::StatusOr<OnsetResult> onset =
        Integrate(config.accumulator, *surprise, DeriveSeed(seed, idx),
                  baseline);
    if (!onset.ok()) return StageError("respond", file, onset.status());
    if (absl::Status s =
            WriteJson(record("onset.json"), OnsetJson(*onset, baseline));
        !s.ok()) {
      return StageError("respond", file, s);
    }

    // A spec-supplied evasive maneuver also governs T2 extrapolation; the
    // simulated onset only sets the response time, since the generated
    // kinematics do not react to it.
    absl::StatusOr<Annotation> annotation =
        Annotate(*trace, looming, config.annotator, spec->em);
    if (!annotation.ok()) {
      return StageError("annotate", file, annotation.status());
    }
    if (!spec->em) SetEvasiveManeuver(&*annotation, onset->onset_t);
    if (absl::Status s =
            WriteJson(record("annotation.json"), AnnotationJson(*annotation));
        !s.ok()) {
      return StageError("annotate", file, s);
    }
    if (annotation->rsp_t) {
      points.push_back({annotation->rut, *annotation->rsp_t});
    }
    if (spec->study_id) {
      for (const Table1Study& study : Table1Studies()) {
        if (study.study_id == *spec->study_id) {
          study_rows.push_back({study.study_id, annotation->rut,
                                study.observed_mean_rsp_t, 0.0});
        }
      }
    }
  }

  std::set<double> distinct;
  for (const auto& p : points) distinct.insert(p.rut);
  json model_json;
  if (distinct.size() >= 2) {
    absl::StatusOr<LinearRspModel> model = FitOls(points);
    if (!model.ok()) return StageError("fit", spec_dir, model.status());
    model_json = ModelJson(*model);
    model_json["source"] = "fitted";
  } else {
    model_json = ModelJson(LinearRspModel::Published());
    model_json["source"] = "published";
  }
  if (absl::Status s = WriteJson(out_dir / "model.json", model_json);
      !s.ok()) {
    return StageError("fit", out_dir, s);
  }
  manifest.outputs.push_back("model.json");

  const bool from_specs = study_rows.size() >= 2;
  absl::StatusOr<ValidationReport> report =
      ValidateTable1(LinearRspModel::Published(),
                     from_specs ? study_rows : Table1ValidationRows());
  if (!report.ok()) return StageError("validate", spec_dir, report.status());
  json report_json = ValidationReportJson(*report);
  report_json["model"] = ModelJson(LinearRspModel::Published());
  report_json["rut_source"] = from_specs ? "recomputed" : "tabulated";
  report_json["r_squared_stated"] = kPublishedValidationR2;
  if (absl::Status s = WriteJson(out_dir / "validation.json", report_json);
      !s.ok()) {
    return StageError("validate", out_dir, s);
  }
  manifest.outputs.push_back("validation.json");

  if (absl::Status s = WriteManifest(out_dir, manifest); !s.ok()) {
    return s;
  }
  return manifest;
}

absl::StatusOr<double> RecomputeStudyRut(const Table1Study& study, double dt) {
  RearEndSpec spec = RearEndSpecFromStudy(study);
  spec.dt = dt;
  absl::StatusOr<KinematicTrace> trace =
      GenerateRearEnd(spec, RearEndVariant::kS1);
  if (!trace.ok()) return trace.status();
  absl::StatusOr<LoomingSignal> looming = ComputeLooming(*trace);
  if (!looming.ok()) return looming.status();
  absl::StatusOr<Annotation> a = Annotate(*trace, *looming);
  if (!a.ok()) return a.status();
  return a->rut;
}

absl::StatusOr<Table1Report> ComputeTable1Report(double dt) {
  Table1Report report;
  std::vector<double> observed, pred_tab, pred_new, canonical;
  const LinearRspModel model = LinearRspModel::Published();
  for (const Table1Study& study : Table1Studies()) {
    absl::StatusOr<double> rut = RecomputeStudyRut(study, dt);
    if (!rut.ok()) {
      return absl::Status(rut.status().code(),
                          absl::StrCat(study.study_id, ": ",
                                       rut.status().message()));
    }
    absl::StatusOr<double> pred = Predict(model, *rut);
    if (!pred.ok()) return pred.status();
    Table1ReportRow row;
    row.study_id = study.study_id;
    row.rut_tabulated = study.rut;
    row.rut_recomputed = *rut;
    row.predicted_tabulated = study.predicted_mean_rsp_t;
    row.predicted = *pred;
    row.observed = study.observed_mean_rsp_t;
    report.rows.push_back(row);
    observed.push_back(row.observed);
    pred_tab.push_back(row.predicted_tabulated);
    pred_new.push_back(row.predicted);
    canonical.push_back(row.canonical);
  }
  absl::StatusOr<double> r2_tab = RSquared(observed, pred_tab);
  absl::StatusOr<double> r2_new = RSquared(observed, pred_new);
  absl::StatusOr<double> r2_can = RSquared(observed, canonical);
  if (!r2_tab.ok()) return r2_tab.status();
  if (!r2_new.ok()) return r2_new.status();
  if (!r2_can.ok()) return r2_can.status();
  report.r_squared_tabulated = *r2_tab;
  report.r_squared_recomputed = *r2_new;
  report.r_squared_canonical = *r2_can;
  return report;
}

json Table1ReportJson(const Table1Report& report) {
  json rows = json::array();
  for (const Table1ReportRow& r : report.rows) {
    rows.push_back({{"study_id", r.study_id},
                    {"rut_tabulated", r.rut_tabulated},
                    {"rut_recomputed", r.rut_recomputed},
                    {"predicted_tabulated", r.predicted_tabulated},
                    {"predicted", r.predicted},
                    {"observed", r.observed},
                    {"canonical", r.canonical}});
  }
  return {{"rows", rows},
          {"r_squared_tabulated", report.r_squared_tabulated},
          {"r_squared_recomputed", report.r_squared_recomputed},
          {"r_squared_canonical", report.r_squared_canonical},
          {"r_squared_stated", report.r_squared_stated},
          {"note",
           "r_squared_tabulated is computed from the printed Pred and Obs "
           "columns and differs from the stated value"}};
}

std::string FormatTable1Report(const Table1Report& report) {
  std::string out = absl::StrFormat(
      "%-22s %8s %8s %8s %8s %8s %9s\n", "study", "RUT", "RUT*", "Pred",
      "Pred*", "Obs", "Canonical");
  for (const Table1ReportRow& r : report.rows) {
    absl::StrAppend(
        &out, absl::StrFormat("%-22s %8.2f %8.3f %8.2f %8.3f %8.2f %9.2f\n",
                              r.study_id, r.rut_tabulated, r.rut_recomputed,
                              r.predicted_tabulated, r.predicted, r.observed,
                              r.canonical));
  }
  absl::StrAppend(
      &out, "(* recomputed from the study kinematics)\n",
      absl::StrFormat("R^2 printed columns:     %.3f (stated %.2f)\n",
                      report.r_squared_tabulated, report.r_squared_stated),
      absl::StrFormat("R^2 recomputed RUTs:     %.3f\n",
                      report.r_squared_recomputed),
      absl::StrFormat("R^2 canonical %.2f s:    %.3f\n",
                      kCanonicalResponseTime, report.r_squared_canonical));
  return out;
}

}  // namespace response_timing
