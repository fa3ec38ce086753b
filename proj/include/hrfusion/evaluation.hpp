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

// Accuracy / coverage metrics, VAD regression error, weighted ensembling and
// the vanilla-vs-GET-aided summary report.
//
// Metrics are fractions in [0, 1] in memory; reports render them as
// percentages with two decimals.

#ifndef HRFUSION_EVALUATION_HPP
#define HRFUSION_EVALUATION_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrfusion/backends.hpp"
#include "hrfusion/core.hpp"

namespace hrfusion {

enum class Mode { kVanilla, kGetAid };
std::string_view ModeName(Mode mode);
std::optional<Mode> ParseMode(std::string_view text);

/// Fraction of all decisions whose label matches the truth. Uncovered
/// decisions count too, so accuracy stays defined at zero coverage.
/// Throws kLengthMismatch or kEmptySet.
double Accuracy(std::span<const Decision> decisions,
                std::span<const Label> truths);

/// Fraction of decisions whose larger score reaches
/// params.coverage_threshold (inclusive). Throws kEmptySet.
double Coverage(std::span<const Decision> decisions, const FusionParams& params);

/// Mean absolute error over samples and the three VAD dimensions.
/// Throws kLengthMismatch or kEmptySet.
double MeanErrorRate(std::span<const PersonVAD> predicted,
                     std::span<const PersonVAD> truth);

/// Element-wise weighted average of k models' predictions. Weights must be
/// non-negative and sum to one within 1e-9 (kWeightsNotNormalized); all lists
/// must have the same length (kLengthMismatch).
std::vector<PersonVAD> EnsembleVad(
    std::span<const std::vector<PersonVAD>> predictions,
    std::span<const double> weights);

/// Exhaustive search over the weight simplex discretised at `grid_step`
/// (1 / grid_step must be an integer). Returns the weights with the lowest
/// validation MeanErrorRate; ties go to the lexicographically smallest vector.
std::vector<double> FitEnsembleWeights(
    std::span<const std::vector<PersonVAD>> predictions,
    std::span<const PersonVAD> truth, double grid_step = 0.05);

struct RunResult {
  std::string config_name;
  Mode mode = Mode::kVanilla;
  std::vector<Decision> decisions;  // aligned with the manifest entries
};

struct ReportRow {
  std::string config_name;
  Mode mode = Mode::kVanilla;
  double accuracy = 0.0;
  double coverage = 0.0;
};

struct MetricMeans {
  double accuracy = 0.0;
  double coverage = 0.0;
};

struct MetricDelta {
  double absolute = 0.0;            // get_aid - vanilla
  std::optional<double> relative;  // absolute / vanilla; absent if vanilla == 0
};

struct EvaluationReport {
  std::string manifest_name;
  std::optional<FusionParams> params;
  std::vector<ReportRow> rows;
  MetricMeans vanilla_mean;
  MetricMeans get_aid_mean;
  MetricDelta accuracy_delta;
  MetricDelta coverage_delta;
};

/// Aggregates per-configuration rows. Every configuration needs both a
/// vanilla and a get_aid row, otherwise kMissingMode.
EvaluationReport SummarizeRows(std::vector<ReportRow> rows);

/// Scores (vanilla, get_aid) run pairs against the manifest's ground truth.
/// Skipped manifest entries are ignored. Throws kMissingMode,
/// kMissingGroundTruth, kLengthMismatch.
EvaluationReport Summarize(
    std::span<const std::pair<RunResult, RunResult>> results,
    const DatasetManifest& manifest);

/// Ground truth of the manifest's active entries, in order. Throws
/// kMissingGroundTruth naming every entry without a label.
std::vector<Label> GroundTruths(const DatasetManifest& manifest);

/// Rounds half-up at `decimals` places.
double RoundHalfUp(double value, int decimals = 2);
/// value * 100 rendered with two decimals, half-up.
std::string FormatPercent(double fraction);

}  // namespace hrfusion

#endif  // HRFUSION_EVALUATION_HPP
