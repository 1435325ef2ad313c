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

#include "response_timing/table1.h"

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"

namespace response_timing {
namespace {

constexpr std::string_view kTable1Csv =
    "study_id,n,sv_type,sv_speed_kph,lv_speed_kph,initial_time_gap_s,"
    "lv_decel_g,observed_mean_rsp_t,t1,t2,rut,predicted_mean_rsp_t\n"
    "engstrom2010effects,20,Car,70,80,1.5,0.51,2.18,0,2.6,2.6,1.87\n"
    "aust2013effects,8,Car,90,90,2.5,0.55,3.16,0,3.6,3.6,2.36\n"
    "markkula2014modeling,48,Truck,80,80,1.5,0.35,1.82,0,2.9,2.9,2.02\n"
    "nilsson2018effects,10,Car,80,48,1.3,0.60,1.04,0,0.7,0.7,0.94\n";

}  // namespace

std::span<const Table1Study> Table1Studies() {
  static const std::vector<Table1Study>* const rows = [] {
    auto parsed = ParseTable1Csv(kTable1Csv);
    return new std::vector<Table1Study>(*std::move(parsed));
  }();
  return *rows;
}

std::string Table1Csv() { return std::string(kTable1Csv); }

absl::StatusOr<std::vector<Table1Study>> ParseTable1Csv(
    std::string_view text) {
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) return table.status();
  constexpr std::string_view kColumns[] = {
      "study_id",   "n",   "sv_type", "sv_speed_kph",
      "lv_speed_kph", "initial_time_gap_s", "lv_decel_g",
      "observed_mean_rsp_t", "t1", "t2", "rut", "predicted_mean_rsp_t"};
  size_t idx[12];
  for (size_t c = 0; c < 12; ++c) {
    auto col = table->Column(kColumns[c]);
    if (!col) {
      return absl::InvalidArgumentError(
          absl::StrCat("MissingColumn: ", std::string(kColumns[c])));
    }
    idx[c] = *col;
  }
  std::vector<Table1Study> out;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    double num[12] = {};
    for (size_t c : {1, 3, 4, 5, 6, 7, 8, 9, 10, 11}) {
      auto v = idx[c] < row.size() ? ParseDouble(row[idx[c]]) : std::nullopt;
      if (!v) {
        return absl::InvalidArgumentError(
            absl::StrCat("bad value in table row ", r, " column ",
                         std::string(kColumns[c])));
      }
      num[c] = *v;
    }
    Table1Study s;
    s.study_id = row[idx[0]];
    s.n = static_cast<int>(num[1]);
    s.sv_type = row[idx[2]];
    s.sv_speed_kph = num[3];
    s.lv_speed_kph = num[4];
    s.initial_time_gap_s = num[5];
    s.lv_decel_g = num[6];
    s.observed_mean_rsp_t = num[7];
    s.t1 = num[8];
    s.t2 = num[9];
    s.rut = num[10];
    s.predicted_mean_rsp_t = num[11];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace response_timing
