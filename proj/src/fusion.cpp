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

#include "hrfusion/fusion.hpp"

#include <algorithm>
#include <string>

#include "hrfusion/traits.hpp"

namespace hrfusion {

Adjusted AdjustForDimension(const BinaryScores& scores, double trait,
                            Dimension dimension, const FusionParams& params) {
  Adjusted out{scores, AdjustmentTrace{dimension, 0.0, 0.0, false}};
  if (trait >= params.neutral_low && trait <= params.neutral_high) {
    return out;
  }

  const bool positive = trait > params.neutral_high;
  const double diff =
      positive ? trait - params.neutral_high : params.neutral_low - trait;
  const double uncapped = diff * params.adjust_factor;
  // Positive traits move mass from violation to no_violation.
  const double shrinking =
      positive ? scores.violation() : scores.no_violation();

  out.trace.delta_from_neutral = diff;
  if (uncapped > shrinking) {
    out.trace.applied_adjustment = shrinking;
    out.trace.capped = true;
    out.scores = positive ? BinaryScores(0.0, 1.0) : BinaryScores(1.0, 0.0);
    return out;
  }

  out.trace.applied_adjustment = uncapped;
  const double sign = positive ? -1.0 : 1.0;
  const double v = std::clamp(scores.violation() + sign * uncapped, 0.0, 1.0);
  const double nv =
      std::clamp(scores.no_violation() - sign * uncapped, 0.0, 1.0);
  out.scores = BinaryScores(v, nv);
  return out;
}

GetAdjusted ApplyGetAdjustment(const BinaryScores& scores,
                               const GlobalEmotionalTraits& get,
                               const FusionParams& params) {
  const Adjusted by_valence =
      AdjustForDimension(scores, get.valence, Dimension::kValence, params);
  const Adjusted by_dominance = AdjustForDimension(
      by_valence.scores, get.dominance, Dimension::kDominance, params);
  return {by_dominance.scores, {by_valence.trace, by_dominance.trace}};
}

Decision InferImage(const BinaryScores& raw,
                    std::span<const Detection> detections,
                    std::span<const PersonVAD> vads,
                    const FusionParams& params) {
  const std::size_t persons = CountPersons(detections, params);
  if (persons != vads.size()) {
    throw Error(ErrorCode::kMisalignedAnnotations,
                std::to_string(vads.size()) + " VAD entries for " +
                    std::to_string(persons) + " person detections");
  }
  if (persons == 0) return VanillaDecision(raw, params);

  const GlobalEmotionalTraits get = ComputeGet(vads);
  GetAdjusted adjusted = ApplyGetAdjustment(raw, get, params);
  return MakeDecision(adjusted.scores, get, std::move(adjusted.traces),
                      params);
}

Decision VanillaDecision(const BinaryScores& raw, const FusionParams& params) {
  return MakeDecision(raw, std::nullopt, {}, params);
}

}  // namespace hrfusion
