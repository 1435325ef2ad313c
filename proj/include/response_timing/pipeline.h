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

// End-to-end orchestration: scenario specs to traces, looming, annotations,
// surprise, accumulator onsets, the fitted response model and its
// validation. Also the run manifest written next to every command's output.

#ifndef RESPONSE_TIMING_PIPELINE_H_
#define RESPONSE_TIMING_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/accumulator.h"
#include "response_timing/annotator.h"
#include "response_timing/belief.h"
#include "response_timing/response_model.h"
#include "response_timing/table1.h"

namespace response_timing {

inline constexpr std::string_view kToolVersion = "0.1.0";

uint64_t Fnv1a64(std::string_view data);

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  uint64_t seed = 0;
  std::string config_hash;  // 16 hex digits
  std::string tool_version{kToolVersion};
};

nlohmann::json ManifestJson(const RunManifest& manifest);

// Hash of the canonical (sorted-key) serialization of `config`.
std::string ConfigHash(const nlohmann::json& config);

// Writes dir/manifest.json atomically.
absl::Status WriteManifest(const std::filesystem::path& dir,
                           const RunManifest& manifest);

absl::StatusOr<AnnotatorConfig> ParseAnnotatorConfigJson(
    const nlohmann::json& j);
nlohmann::json AnnotatorConfigJson(const AnnotatorConfig& config);

struct PipelineConfig {
  AnnotatorConfig annotator;
  AccumulatorParams accumulator;
  BeliefPrior lateral_prior = BeliefPrior::Lateral();
  BeliefPrior looming_prior = BeliefPrior::Looming();
  std::optional<double> dt;  // overrides the specs' sample period
  int looming_window = 1;
};

absl::StatusOr<PipelineConfig> ParsePipelineConfigJson(
    const nlohmann::json& j);
nlohmann::json PipelineConfigJson(const PipelineConfig& config);

// Scenario spec files (*.json) in `dir`, sorted by file name.
absl::StatusOr<std::vector<std::filesystem::path>> ListSpecFiles(
    const std::filesystem::path& dir);

// Per spec, written under out_dir/<spec file stem>/: trace.csv, trace.json,
// looming.csv, annotation.json, surprise.csv, onset.json. Then
// out_dir/model.json, out_dir/validation.json and out_dir/manifest.json.
// An empty spec directory is a FailedPrecondition; stage errors name the
// stage and the spec file.
absl::StatusOr<RunManifest> RunPipeline(const std::filesystem::path& spec_dir,
                                        const std::filesystem::path& out_dir,
                                        uint64_t seed,
                                        const PipelineConfig& config = {});

struct Table1ReportRow {
  std::string study_id;
  double rut_tabulated = 0.0;
  double rut_recomputed = 0.0;
  double predicted_tabulated = 0.0;
  double predicted = 0.0;  // published model at the recomputed RUT
  double observed = 0.0;
  double canonical = kCanonicalResponseTime;
};

struct Table1Report {
  std::vector<Table1ReportRow> rows;
  // From the printed Pred and Obs columns.
  double r_squared_tabulated = 0.0;
  // Published model at the recomputed RUTs.
  double r_squared_recomputed = 0.0;
  double r_squared_canonical = 0.0;
  double r_squared_stated = kPublishedValidationR2;
};

// Simulates a study's kinematics and returns T2 - T1 from the annotator.
absl::StatusOr<double> RecomputeStudyRut(const Table1Study& study,
                                         double dt = 0.001);

absl::StatusOr<Table1Report> ComputeTable1Report(double dt = 0.001);
nlohmann::json Table1ReportJson(const Table1Report& report);
std::string FormatTable1Report(const Table1Report& report);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_PIPELINE_H_
