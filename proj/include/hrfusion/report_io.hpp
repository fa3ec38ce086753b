// Copyright 2026 The hrfusion Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Report files. CSV: header "config,mode,accuracy,coverage", one row per
// configuration and mode, metrics as percentages with two decimals. JSON
// mirrors EvaluationReport and echoes the fusion parameters when known.

#ifndef HRFUSION_REPORT_IO_HPP
#define HRFUSION_REPORT_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hrfusion/evaluation.hpp"

namespace hrfusion {

std::string ReportToCsv(const EvaluationReport& report);
std::string ReportToJson(const EvaluationReport& report);

/// Rows plus whatever header information the file carried.
struct LoadedRows {
  std::vector<ReportRow> rows;
  std::optional<std::string> manifest_name;
  std::optional<FusionParams> params;
};

LoadedRows ParseRowsCsv(const std::string& text, const std::string& origin);
LoadedRows ParseReportJson(const std::string& text, const std::string& origin);
/// Dispatches on extension: ".json" is a JSON report, anything else CSV.
LoadedRows LoadRows(const std::filesystem::path& path);

/// A `--expect metric mode value tolerance` assertion. `metric` is accuracy or
/// coverage; `mode` is vanilla, get_aid, delta (absolute, in points) or
/// relative (in percent). `value` and `tolerance` are percentages.
struct Expectation {
  std::string metric;
  std::string mode;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Throws kInvalidValue on an unknown metric or mode or unparsable numbers.
Expectation ParseExpectation(const std::vector<std::string>& fields);

/// The report quantity an expectation refers to, in percent. nullopt when a
/// relative delta is undefined.
std::optional<double> ExpectedQuantity(const EvaluationReport& report,
                                       const Expectation& expectation);

/// Empty when satisfied, otherwise a message describing the violation.
std::string CheckExpectation(const EvaluationReport& report,
                             const Expectation& expectation);

}  // namespace hrfusion

#endif  // HRFUSION_REPORT_IO_HPP
