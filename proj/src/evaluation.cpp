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

#include "hrfusion/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace hrfusion {

std::string_view ModeName(Mode mode) {
  return mode == Mode::kVanilla ? "vanilla" : "get_aid";
}

std::optional<Mode> ParseMode(std::string_view text) {
  if (text == "vanilla") return Mode::kVanilla;
  if (text == "get_aid") return Mode::kGetAid;
  return std::nullopt;
}

double Accuracy(std::span<const Decision> decisions,
                std::span<const Label> truths) {
  if (decisions.size() != truths.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "accuracy needs one ground truth per decision");
  }
  if (decisions.empty()) {
    throw Error(ErrorCode::kEmptySet, "accuracy of an empty set");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].label == truths[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

double Coverage(std::span<const Decision> decisions,
                const FusionParams& params) {
  if (decisions.empty()) {
    throw Error(ErrorCode::kEmptySet, "coverage of an empty set");
  }
  const auto covered =
      std::count_if(decisions.begin(), decisions.end(), [&](const Decision& d) {
        return IsCovered(d.scores, params);
      });
  return static_cast<double>(covered) / static_cast<double>(decisions.size());
}

double MeanErrorRate(std::span<const PersonVAD> predicted,
                     std::span<const PersonVAD> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "prediction and truth lists differ in length");
  }
  if (predicted.empty()) {
    throw Error(ErrorCode::kEmptySet, "mean error rate of an empty set");
  }
  return (ToMatrix(predicted) - ToMatrix(truth)).cwiseAbs().mean();
}

namespace {

void CheckSameLength(std::span<const std::vector<PersonVAD>> predictions) {
  for (const auto& p : predictions) {
    if (p.size() != predictions.front().size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "model prediction lists differ in length");
    }
  }
}

VadMatrix WeightedSum(std::span<const VadMatrix> models,
                      std::span<const double> weights) {
  VadMatrix acc = weights[0] * models[0];
  for (std::size_t k = 1; k < models.size(); ++k) {
    acc += weights[k] * models[k];
  }
  return acc.cwiseMax(kVadMin).cwiseMin(kVadMax);
}

}  // namespace

std::vector<PersonVAD> EnsembleVad(
    std::span<const std::vector<PersonVAD>> predictions,
    std::span<const double> weights) {
  if (predictions.empty() || predictions.size() != weights.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "need one weight per model and at least one model");
  }
  CheckSameLength(predictions);
  const bool negative =
      std::any_of(weights.begin(), weights.end(),
                  [](double w) { return !(w >= 0.0) || !std::isfinite(w); });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (negative || std::abs(total - 1.0) > kInternalSumTolerance) {
    throw Error(ErrorCode::kWeightsNotNormalized,
                "ensemble weights must be non-negative and sum to 1");
  }
  std::vector<VadMatrix> models;
  models.reserve(predictions.size());
  for (const auto& p : predictions) models.push_back(ToMatrix(p));
  return FromMatrix(WeightedSum(models, weights));
}

std::vector<double> FitEnsembleWeights(
    std::span<const std::vector<PersonVAD>> predictions,
    std::span<const PersonVAD> truth, double grid_step) {
  if (predictions.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch,
                "weight fitting needs at least two models");
  }
  CheckSameLength(predictions);
  if (predictions.front().size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "validation truth and predictions differ in length");
  }
  if (truth.empty()) {
    throw Error(ErrorCode::kEmptySet, "no validation samples");
  }
  const double cells = 1.0 / grid_step;
  const long units = std::lround(cells);
  if (!std::isfinite(cells) || units < 1 ||
      std::abs(cells - static_cast<double>(units)) > 1e-9 * cells) {
    throw Error(ErrorCode::kInvalidValue,
                "grid_step must divide 1 into a whole number of steps");
  }

  std::vector<VadMatrix> models;
  for (const auto& p : predictions) models.push_back(ToMatrix(p));
  const VadMatrix target = ToMatrix(truth);
  const std::size_t k = models.size();

  // Compositions of `units` into k parts, visited in lexicographic order so
  // the first minimum found is the lexicographically smallest.
  std::vector<long> counts(k, 0);
  std::vector<double> weights(k), best;
  double best_error = std::numeric_limits<double>::infinity();
  constexpr double kTieTolerance = 1e-12;

  auto evaluate = [&] {
    for (std::size_t i = 0; i < k; ++i) {
      weights[i] = static_cast<double>(counts[i]) / static_cast<double>(units);
    }
    const double err =
        (WeightedSum(models, weights) - target).cwiseAbs().mean();
    if (err < best_error - kTieTolerance) {
      best_error = err;
      best = weights;
    }
  };
  auto recurse = [&](auto&& self, std::size_t index, long remaining) -> void {
    if (index + 1 == k) {
      counts[index] = remaining;
      evaluate();
      return;
    }
    for (long c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, units);
  return best;
}

std::vector<Label> GroundTruths(const DatasetManifest& manifest) {
  std::vector<Label> truths;
  std::string missing;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.skipped) continue;
    if (!e.ground_truth) {
      missing += (missing.empty() ? "" : ", ") + e.image_id;
      continue;
    }
    truths.push_back(*e.ground_truth);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "entries without ground_truth: " + missing);
  }
  return truths;
}

EvaluationReport SummarizeRows(std::vector<ReportRow> rows) {
  std::map<std::string, std::pair<int, int>> modes;
  for (const ReportRow& r : rows) {
    auto& [vanilla, get_aid] = modes[r.config_name];
    (r.mode == Mode::kVanilla ? vanilla : get_aid) += 1;
  }
  for (const auto& [config, counts] : modes) {
    if (counts.first != 1 || counts.second != 1) {
      throw Error(ErrorCode::kMissingMode,
                  "configuration '" + config +
                      "' needs exactly one vanilla and one get_aid row");
    }
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptySet, "no report rows");

  EvaluationReport report;
  const double n = static_cast<double>(modes.size());
  for (const ReportRow& r : rows) {
    MetricMeans& m =
        r.mode == Mode::kVanilla ? report.vanilla_mean : report.get_aid_mean;
    m.accuracy += r.accuracy;
    m.coverage += r.coverage;
  }
  for (MetricMeans* m : {&report.vanilla_mean, &report.get_aid_mean}) {
    m->accuracy /= n;
    m->coverage /= n;
  }
  auto delta = [](double base, double aided) {
    MetricDelta d;
    d.absolute = aided - base;
    if (base != 0.0) d.relative = d.absolute / base;
    return d;
  };
  report.accuracy_delta =
      delta(report.vanilla_mean.accuracy, report.get_aid_mean.accuracy);
  report.coverage_delta =
      delta(report.vanilla_mean.coverage, report.get_aid_mean.coverage);
  report.rows = std::move(rows);
  return report;
}

EvaluationReport Summarize(
    std::span<const std::pair<RunResult, RunResult>> results,
    const DatasetManifest& manifest) {
  const std::vector<Label> truths = GroundTruths(manifest);
  std::vector<ReportRow> rows;
  for (const auto& [vanilla, get_aid] : results) {
    if (vanilla.mode != Mode::kVanilla || get_aid.mode != Mode::kGetAid) {
      throw Error(ErrorCode::kMissingMode,
                  "result pair for '" + vanilla.config_name +
                      "' must be (vanilla, get_aid)");
    }
    for (const RunResult* run : {&vanilla, &get_aid}) {
      rows.push_back({run->config_name, run->mode,
                      Accuracy(run->decisions, truths),
                      Coverage(run->decisions, manifest.params)});
    }
  }
  EvaluationReport report = SummarizeRows(std::move(rows));
  report.manifest_name = manifest.name;
  report.params = manifest.params;
  return report;
}

double RoundHalfUp(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge absorbs binary representation error at exact half-way points
  // such as 12.415 stored as 12.41499999...
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::string FormatPercent(double fraction) {
  double pct = RoundHalfUp(fraction * 100.0, 2);
  if (pct == 0.0) pct = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", pct);
  return buf;
}

}  // namespace hrfusion
