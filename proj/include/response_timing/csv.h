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

// Minimal CSV table reading/writing shared by the file formats of this
// library. Only the dialect we emit is supported: comma separated, '.'
// decimal point, a single header line, no quoting.

#ifndef RESPONSE_TIMING_CSV_H_
#define RESPONSE_TIMING_CSV_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace response_timing {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header, if present.
  std::optional<size_t> Column(std::string_view name) const;
};

absl::StatusOr<CsvTable> ParseCsv(std::string_view text);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

// Writes through a temporary file and renames it into place.
absl::Status WriteFileAtomic(const std::filesystem::path& path,
                             std::string_view contents);

// Shortest representation that parses back to the same double.
std::string FormatDouble(double value);

// Parses a full cell as a double. Accepts "nan"/"inf" so callers can report
// non-finite values with a precise location.
std::optional<double> ParseDouble(std::string_view cell);

std::optional<bool> ParseBool(std::string_view cell);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_CSV_H_
