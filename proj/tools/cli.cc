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

// Command-line entry point for the response-timing toolkit.
//
//   response_timing <command> [options]
//
// Every command writes its outputs and a manifest.json into --out.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"
#include "response_timing/abc_fit.h"
#include "response_timing/accumulator.h"
#include "response_timing/annotator.h"
#include "response_timing/belief.h"
#include "response_timing/csv.h"
#include "response_timing/looming.h"
#include "response_timing/pipeline.h"
#include "response_timing/response_model.h"
#include "response_timing/scenario_sim.h"
#include "response_timing/table1.h"
#include "response_timing/trace.h"

namespace rt = response_timing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int ExitCode(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kFailedPrecondition:
      return kExitUsage;
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kInternal:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

struct CommonOptions {
  uint64_t seed = 0;
  std::optional<double> dt;
  std::string config;
  std::string out = ".";
};

absl::StatusOr<json> LoadJson(const std::string& path) {
  absl::StatusOr<std::string> text = rt::ReadFile(path);
  if (!text.ok()) return text.status();
  json j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid JSON in ", path));
  }
  return j;
}

absl::StatusOr<json> LoadConfig(const CommonOptions& common) {
  if (common.config.empty()) return json::object();
  return LoadJson(common.config);
}

absl::Status EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

// Writes the outputs of one command plus its manifest.
class Run {
 public:
  Run(std::string command, const CommonOptions& common, const json& config)
      : out_(common.out) {
    manifest_.command = std::move(command);
    manifest_.seed = common.seed;
    json hashed = config;
    hashed["dt"] = common.dt ? json(*common.dt) : json(nullptr);
    manifest_.config_hash = rt::ConfigHash(hashed);
  }

  void Input(const std::string& path) { manifest_.inputs.push_back(path); }

  absl::Status Write(const std::string& leaf, const std::string& content) {
    if (absl::Status s = EnsureDir(out_); !s.ok()) return s;
    manifest_.outputs.push_back(leaf);
    return rt::WriteFileAtomic(out_ / leaf, content);
  }

  absl::Status WriteJson(const std::string& leaf, const json& j) {
    return Write(leaf, j.dump(2) + "\n");
  }

  absl::Status Finish() {
    if (absl::Status s = EnsureDir(out_); !s.ok()) return s;
    return rt::WriteManifest(out_, manifest_);
  }

 private:
  fs::path out_;
  rt::RunManifest manifest_;
};

absl::StatusOr<rt::KinematicTrace> LoadTraceOption(
    const std::string& csv, const std::string& sidecar,
    const std::optional<double>& dt) {
  absl::StatusOr<rt::KinematicTrace> trace =
      sidecar.empty() ? rt::LoadTrace(csv) : rt::LoadTrace(csv, sidecar);
  if (!trace.ok() || !dt) return trace;
  return rt::Resample(*trace, *dt);
}

absl::Status CmdSimulate(const CommonOptions& common,
                         const std::string& spec_path) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<json> j = LoadJson(spec_path);
  if (!j.ok()) return j.status();
  absl::StatusOr<rt::ScenarioSpec> spec = rt::ParseScenarioSpec(*j);
  if (!spec.ok()) return spec.status();
  absl::StatusOr<rt::KinematicTrace> trace = rt::Generate(*spec, common.dt);
  if (!trace.ok()) return trace.status();
  Run run("simulate", common, *config);
  run.Input(spec_path);
  if (absl::Status s = run.Write("trace.csv", rt::FormatTraceCsv(*trace));
      !s.ok()) {
    return s;
  }
  if (absl::Status s = run.WriteJson("trace.json", rt::SidecarJson(*trace));
      !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::Status CmdLoom(const CommonOptions& common, const std::string& trace_csv,
                     const std::string& sidecar, int window) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<rt::KinematicTrace> trace =
      LoadTraceOption(trace_csv, sidecar, common.dt);
  if (!trace.ok()) return trace.status();
  absl::StatusOr<rt::LoomingSignal> looming = rt::ComputeLooming(*trace, window);
  if (!looming.ok()) return looming.status();
  Run run("loom", common, *config);
  run.Input(trace_csv);
  if (absl::Status s = run.Write("looming.csv", rt::FormatLoomingCsv(*looming));
      !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::Status CmdAnnotate(const CommonOptions& common,
                         const std::string& trace_csv,
                         const std::string& sidecar,
                         const std::string& looming_csv,
                         std::optional<double> em) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<rt::AnnotatorConfig> cfg =
      rt::ParseAnnotatorConfigJson(*config);
  if (!cfg.ok()) return cfg.status();
  absl::StatusOr<rt::KinematicTrace> trace =
      LoadTraceOption(trace_csv, sidecar, common.dt);
  if (!trace.ok()) return trace.status();
  rt::LoomingSignal looming;
  if (!looming_csv.empty()) {
    absl::StatusOr<std::string> text = rt::ReadFile(looming_csv);
    if (!text.ok()) return text.status();
    absl::StatusOr<rt::LoomingSignal> parsed = rt::ParseLoomingCsv(*text);
    if (!parsed.ok()) return parsed.status();
    looming = *std::move(parsed);
  } else {
    absl::StatusOr<rt::LoomingSignal> computed = rt::ComputeLooming(*trace);
    if (computed.ok()) looming = *std::move(computed);
  }
  absl::StatusOr<rt::Annotation> annotation =
      rt::Annotate(*trace, looming, *cfg, em);
  if (!annotation.ok()) return annotation.status();
  Run run("annotate", common, *config);
  run.Input(trace_csv);
  if (!looming_csv.empty()) run.Input(looming_csv);
  if (absl::Status s =
          run.WriteJson("annotation.json", rt::AnnotationJson(*annotation));
      !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::Status CmdFit(const CommonOptions& common,
                    const std::vector<std::string>& annotations) {
  std::vector<rt::RutRspPoint> points;
  Run run("fit", common, json::object());
  for (const std::string& path : annotations) {
    absl::StatusOr<json> j = LoadJson(path);
    if (!j.ok()) return j.status();
    absl::StatusOr<rt::Annotation> a = rt::ParseAnnotationJson(*j);
    if (!a.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": ", a.status().message()));
    }
    run.Input(path);
    if (a->rsp_t) points.push_back({a->rut, *a->rsp_t});
  }
  absl::StatusOr<rt::LinearRspModel> model = rt::FitOls(points);
  if (!model.ok()) return model.status();
  json out = rt::ModelJson(*model);
  out["source"] = "fitted";
  if (absl::Status s = run.WriteJson("model.json", out); !s.ok()) return s;
  return run.Finish();
}

absl::Status CmdValidate(const CommonOptions& common,
                         const std::string& model_path,
                         const std::string& table_path) {
  rt::LinearRspModel model = rt::LinearRspModel::Published();
  Run run("validate", common, json::object());
  if (!model_path.empty()) {
    absl::StatusOr<json> j = LoadJson(model_path);
    if (!j.ok()) return j.status();
    absl::StatusOr<rt::LinearRspModel> parsed = rt::ParseModelJson(*j);
    if (!parsed.ok()) return parsed.status();
    model = *parsed;
    run.Input(model_path);
  }
  std::vector<rt::ValidationRow> rows = rt::Table1ValidationRows();
  if (!table_path.empty()) {
    absl::StatusOr<std::string> text = rt::ReadFile(table_path);
    if (!text.ok()) return text.status();
    absl::StatusOr<std::vector<rt::Table1Study>> studies =
        rt::ParseTable1Csv(*text);
    if (!studies.ok()) return studies.status();
    rows.clear();
    for (const rt::Table1Study& s : *studies) {
      rows.push_back({s.study_id, s.rut, s.observed_mean_rsp_t, 0.0});
    }
    run.Input(table_path);
  }
  absl::StatusOr<rt::ValidationReport> report =
      rt::ValidateTable1(model, std::move(rows));
  if (!report.ok()) return report.status();
  json out = rt::ValidationReportJson(*report);
  out["model"] = rt::ModelJson(model);
  out["r_squared_stated"] = rt::kPublishedValidationR2;
  std::cout << out.dump(2) << "\n";
  if (absl::Status s = run.WriteJson("validation.json", out); !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::Status CmdTable1(const CommonOptions& common, bool write) {
  const double dt = common.dt.value_or(0.001);
  absl::StatusOr<rt::Table1Report> report = rt::ComputeTable1Report(dt);
  if (!report.ok()) return report.status();
  std::cout << rt::FormatTable1Report(*report);
  if (!write) return absl::OkStatus();
  Run run("table1", common, json::object());
  if (absl::Status s =
          run.WriteJson("table1_report.json", rt::Table1ReportJson(*report));
      !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::Status CmdSurprise(const CommonOptions& common,
                         const std::string& trace_csv,
                         const std::string& sidecar,
                         const std::string& observable_name) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<rt::Observable> observable =
      rt::ParseObservable(observable_name);
  if (!observable.ok()) return observable.status();
  json prior_json = *config;
  if (!prior_json.contains("kind")) {
    prior_json["kind"] = *observable == rt::Observable::kThetaDot
                             ? "constant_looming_rear_end"
                             : "constant_velocity_lateral";
  }
  absl::StatusOr<rt::BeliefPrior> prior = rt::ParseBeliefPriorJson(prior_json);
  if (!prior.ok()) return prior.status();
  absl::StatusOr<rt::KinematicTrace> trace =
      LoadTraceOption(trace_csv, sidecar, common.dt);
  if (!trace.ok()) return trace.status();
  absl::StatusOr<rt::SurpriseSeries> series =
      rt::ComputeSurpriseSeries(*prior, *trace, *observable);
  if (!series.ok()) return series.status();
  Run run("surprise", common, *config);
  run.Input(trace_csv);
  if (absl::Status s = run.Write("surprise.csv", rt::FormatSurpriseCsv(*series));
      !s.ok()) {
    return s;
  }
  return run.Finish();
}

absl::StatusOr<rt::SurpriseSeries> LoadSurprise(const std::string& path) {
  absl::StatusOr<std::string> text = rt::ReadFile(path);
  if (!text.ok()) return text.status();
  return rt::ParseSurpriseCsv(*text);
}

absl::Status CmdRespond(const CommonOptions& common,
                        const std::string& surprise_csv,
                        std::optional<double> baseline, int mc_runs,
                        bool trajectory) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<rt::AccumulatorParams> params =
      rt::ParseAccumulatorParamsJson(*config);
  if (!params.ok()) return params.status();
  if (common.dt) params->dt = *common.dt;
  absl::StatusOr<rt::SurpriseSeries> series = LoadSurprise(surprise_csv);
  if (!series.ok()) return series.status();
  const double base = baseline.value_or(rt::DefaultBaseline(*series));
  absl::StatusOr<rt::OnsetResult> onset =
      rt::Integrate(*params, *series, common.seed, base, trajectory);
  if (!onset.ok()) return onset.status();
  json out = rt::OnsetJson(*onset, base);
  if (mc_runs > 0) {
    absl::StatusOr<rt::MonteCarloResult> mc =
        rt::MonteCarloOnsets(*params, *series, base, mc_runs, common.seed);
    if (!mc.ok()) return mc.status();
    out["monte_carlo"] = rt::OnsetSummaryJson(mc->summary);
  }
  Run run("respond", common, *config);
  run.Input(surprise_csv);
  if (absl::Status s = run.WriteJson("onset.json", out); !s.ok()) return s;
  if (trajectory && onset->trajectory) {
    if (absl::Status s = run.Write("trajectory.csv",
                                   rt::FormatTrajectoryCsv(*onset->trajectory));
        !s.ok()) {
      return s;
    }
  }
  return run.Finish();
}

// Onsets JSON: either an array aligned with the sorted surprise files or an
// object keyed by file stem.
absl::StatusOr<std::vector<double>> ReadOnsets(
    const json& j, const std::vector<fs::path>& files) {
  std::vector<double> onsets;
  const json& body = j.is_object() && j.contains("onsets") ? j.at("onsets") : j;
  try {
    if (body.is_array()) {
      for (const json& v : body) onsets.push_back(v.get<double>());
    } else if (body.is_object()) {
      for (const fs::path& f : files) {
        const std::string key = f.stem().string();
        if (!body.contains(key)) {
          return absl::InvalidArgumentError(
              absl::StrCat("LengthMismatch: no onset for ", key));
        }
        onsets.push_back(body.at(key).get<double>());
      }
    } else {
      return absl::InvalidArgumentError("onsets must be an array or object");
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed onsets JSON: ", e.what()));
  }
  return onsets;
}

absl::Status CmdAbc(const CommonOptions& common, const std::string& surprise_dir,
                    const std::string& onsets_path, int threads) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  json cfg_json = *config;
  cfg_json["seed"] = common.seed;
  absl::StatusOr<rt::AbcConfig> cfg = rt::ParseAbcConfigJson(cfg_json);
  if (!cfg.ok()) return cfg.status();
  cfg->threads = threads;
  if (common.dt) cfg->base.dt = *common.dt;

  std::error_code ec;
  std::vector<fs::path> files;
  if (!fs::is_directory(surprise_dir, ec)) {
    return absl::FailedPreconditionError(
        absl::StrCat(surprise_dir, " is not a directory"));
  }
  for (const auto& e : fs::directory_iterator(surprise_dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("no surprise CSVs in ", surprise_dir));
  }
  Run run("abc", common, cfg_json);
  std::vector<rt::SurpriseSeries> sets;
  std::vector<double> baselines;
  for (const fs::path& f : files) {
    absl::StatusOr<rt::SurpriseSeries> s = LoadSurprise(f.string());
    if (!s.ok()) {
      return absl::Status(s.status().code(),
                          absl::StrCat(f.string(), ": ", s.status().message()));
    }
    baselines.push_back(rt::DefaultBaseline(*s));
    sets.push_back(*std::move(s));
    run.Input(f.filename().string());
  }
  absl::StatusOr<json> onsets_json = LoadJson(onsets_path);
  if (!onsets_json.ok()) return onsets_json.status();
  absl::StatusOr<std::vector<double>> onsets = ReadOnsets(*onsets_json, files);
  if (!onsets.ok()) return onsets.status();
  run.Input(onsets_path);

  absl::StatusOr<rt::AbcPosterior> posterior =
      rt::RejectionAbc(*cfg, sets, *onsets, baselines);
  if (!posterior.ok()) return posterior.status();
  if (absl::Status s =
          run.Write("posterior.csv", rt::FormatPosteriorCsv(*posterior));
      !s.ok()) {
    return s;
  }
  json summary = rt::AbcSummaryJson(*posterior, *cfg);
  if (absl::Status s = run.WriteJson("abc_summary.json", summary); !s.ok()) {
    return s;
  }
  if (posterior->accepted.empty()) {
    std::cerr << "NoAcceptances: no proposal within epsilon "
              << posterior->epsilon << "; relax epsilon\n";
  }
  return run.Finish();
}

absl::Status CmdPipeline(const CommonOptions& common,
                         const std::string& spec_dir) {
  absl::StatusOr<json> config = LoadConfig(common);
  if (!config.ok()) return config.status();
  absl::StatusOr<rt::PipelineConfig> cfg =
      rt::ParsePipelineConfigJson(*config);
  if (!cfg.ok()) return cfg.status();
  if (common.dt) cfg->dt = common.dt;
  absl::StatusOr<rt::RunManifest> manifest =
      rt::RunPipeline(spec_dir, common.out, common.seed, *cfg);
  if (!manifest.ok()) return manifest.status();
  std::cout << "wrote " << manifest->outputs.size() << " outputs to "
            << common.out << "\n";
  return absl::OkStatus();
}

void AddCommon(CLI::App* cmd, CommonOptions* common) {
  cmd->add_option("--seed", common->seed, "Root RNG seed");
  cmd->add_option("--dt", common->dt, "Sample period override (s)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--config", common->config, "Configuration JSON");
  cmd->add_option("--out", common->out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surprise-based response timing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rt::kToolVersion));

  CommonOptions common;
  absl::Status status;

  std::string spec_path, trace_csv, sidecar, looming_csv, model_path,
      table_path, observable = "lateral_y", surprise_csv, surprise_dir,
      onsets_path, spec_dir;
  std::optional<double> em, baseline;
  std::vector<std::string> annotations;
  int window = 1, mc_runs = 0, threads = 1;
  bool trajectory = false, write_report = false;

  CLI::App* simulate = app.add_subcommand("simulate", "Scenario spec to trace");
  AddCommon(simulate, &common);
  simulate->add_option("spec", spec_path, "Scenario spec JSON")->required();
  simulate->callback([&] { status = CmdSimulate(common, spec_path); });

  CLI::App* loom = app.add_subcommand("loom", "Trace to looming signal");
  AddCommon(loom, &common);
  loom->add_option("trace", trace_csv, "Trace CSV")->required();
  loom->add_option("--sidecar", sidecar, "Sidecar JSON");
  loom->add_option("--window", window, "Odd smoothing window (samples)")
      ->check(CLI::PositiveNumber);
  loom->callback([&] { status = CmdLoom(common, trace_csv, sidecar, window); });

  CLI::App* annotate = app.add_subcommand("annotate", "Annotate T1, T2, RUT");
  AddCommon(annotate, &common);
  annotate->add_option("trace", trace_csv, "Trace CSV")->required();
  annotate->add_option("--sidecar", sidecar, "Sidecar JSON");
  annotate->add_option("--looming", looming_csv, "Looming CSV");
  annotate->add_option("--em", em, "Evasive maneuver onset (s)");
  annotate->callback([&] {
    status = CmdAnnotate(common, trace_csv, sidecar, looming_csv, em);
  });

  CLI::App* fit = app.add_subcommand("fit", "Fit RspT = m + k RUT");
  AddCommon(fit, &common);
  fit->add_option("annotations", annotations, "Annotation JSON files")
      ->required();
  fit->callback([&] { status = CmdFit(common, annotations); });

  CLI::App* validate =
      app.add_subcommand("validate", "Validate a model on the study table");
  AddCommon(validate, &common);
  validate->add_option("--model", model_path, "Model JSON (default published)");
  validate->add_option("--table", table_path, "Study table CSV");
  validate->callback(
      [&] { status = CmdValidate(common, model_path, table_path); });

  CLI::App* table1 =
      app.add_subcommand("table1", "Reproduce the published validation table");
  AddCommon(table1, &common);
  table1->add_flag("--write", write_report, "Also write table1_report.json");
  table1->callback([&] { status = CmdTable1(common, write_report); });

  CLI::App* surprise = app.add_subcommand("surprise", "Trace to surprisal");
  AddCommon(surprise, &common);
  surprise->add_option("trace", trace_csv, "Trace CSV")->required();
  surprise->add_option("--sidecar", sidecar, "Sidecar JSON");
  surprise->add_option("--observable", observable, "lateral_y or theta_dot");
  surprise->callback(
      [&] { status = CmdSurprise(common, trace_csv, sidecar, observable); });

  CLI::App* respond =
      app.add_subcommand("respond", "Accumulate surprise to a response onset");
  AddCommon(respond, &common);
  respond->add_option("surprise", surprise_csv, "Surprise CSV")->required();
  respond->add_option("--baseline", baseline, "Baseline surprisal (nats)");
  respond->add_option("--mc-runs", mc_runs, "Monte Carlo runs for a summary");
  respond->add_flag("--trajectory", trajectory, "Write trajectory.csv");
  respond->callback([&] {
    status = CmdRespond(common, surprise_csv, baseline, mc_runs, trajectory);
  });

  CLI::App* abc = app.add_subcommand("abc", "Fit accumulator parameters");
  AddCommon(abc, &common);
  abc->add_option("surprise_dir", surprise_dir, "Directory of surprise CSVs")
      ->required();
  abc->add_option("onsets", onsets_path, "Observed onsets JSON")->required();
  abc->add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  abc->callback(
      [&] { status = CmdAbc(common, surprise_dir, onsets_path, threads); });

  CLI::App* pipeline = app.add_subcommand("pipeline", "Run every stage");
  AddCommon(pipeline, &common);
  pipeline->add_option("spec_dir", spec_dir, "Directory of scenario specs")
      ->required();
  pipeline->callback([&] { status = CmdPipeline(common, spec_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (!status.ok()) {
    std::cerr << "error: " << status.message() << "\n";
    return ExitCode(status);
  }
  return kExitOk;
}
