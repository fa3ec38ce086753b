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

// Command-line workflows: classify, evaluate, compare, fit-ensemble, synth.

#ifndef HRFUSION_CLI_HPP
#define HRFUSION_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hrfusion/backends.hpp"
#include "hrfusion/core.hpp"
#include "hrfusion/evaluation.hpp"

namespace hrfusion::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitExpectationFailed = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitInternal = 4,
};

/// Default directory for `--output` when the flag is absent.
inline constexpr const char* kOutputDirEnv = "HRFUSION_OUTPUT_DIR";

struct ParamOverrides {
  std::optional<double> adjust_factor;
  std::optional<double> neutral_low;
  std::optional<double> neutral_high;
  std::optional<double> detection_threshold;
  std::optional<double> coverage_threshold;

  FusionParams ApplyTo(FusionParams base) const;
};

enum class RunMode { kVanilla, kGetAid, kBoth };

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path output_path;  // empty: stdout (classify) or default
  ParamOverrides overrides;
  RunMode mode = RunMode::kBoth;
  int worker_count = 1;
  bool strict_parsing = false;
  std::string config_name;  // evaluate: row label, defaults to manifest name
};

/// Streams one JSON-lines decision record per image and mode, in manifest
/// order, independent of worker_count. Progress lines go to `diag`.
void Classify(const RunConfig& config, std::ostream& out, std::ostream& diag);

/// Runs vanilla and GET-aided inference over the manifest and scores both.
EvaluationReport Evaluate(const RunConfig& config, std::ostream& diag);

/// Parses `args` (without the program name) and runs the chosen command.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int Run(int argc, char** argv);

}  // namespace hrfusion::cli

#endif  // HRFUSION_CLI_HPP
