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

// Published lead-vehicle braking simulator studies used for external
// validation of the response-time model: kinematics as tabulated (kph, s,
// g) together with the annotated stimulus timing and the observed and
// predicted mean response times, all as printed.

#ifndef RESPONSE_TIMING_TABLE1_H_
#define RESPONSE_TIMING_TABLE1_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace response_timing {

inline constexpr double kGravity = 9.81;  // m/s^2 per g as tabulated
inline constexpr double kKphToMps = 1.0 / 3.6;

struct Table1Study {
  std::string study_id;
  int n = 0;
  std::string sv_type;
  double sv_speed_kph = 0.0;
  double lv_speed_kph = 0.0;
  double initial_time_gap_s = 0.0;
  double lv_decel_g = 0.0;
  double observed_mean_rsp_t = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double rut = 0.0;
  double predicted_mean_rsp_t = 0.0;
};

std::span<const Table1Study> Table1Studies();

// Same rows as a CSV document, byte-identical to data/table1.csv.
std::string Table1Csv();

// Parses a CSV in the Table1Csv() layout.
absl::StatusOr<std::vector<Table1Study>> ParseTable1Csv(
    std::string_view text);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_TABLE1_H_
