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

// GET-driven adjustment of the binary abuse scores and per-image inference.
//
// For one trait value d on the 1..10 scale:
//   neutral_low <= d <= neutral_high   scores unchanged
//   d > neutral_high                   violation -= (d - neutral_high) * factor
//   d < neutral_low                    violation += (neutral_low - d) * factor
// with the opposite change on the no-violation leg. The shift is capped at
// the size of the shrinking leg so both scores stay in [0, 1].

#ifndef HRFUSION_FUSION_HPP
#define HRFUSION_FUSION_HPP

#include <span>
#include <utility>
#include <vector>

#include "hrfusion/core.hpp"

namespace hrfusion {

struct Adjusted {
  BinaryScores scores;
  AdjustmentTrace trace;
};

Adjusted AdjustForDimension(const BinaryScores& scores, double trait,
                            Dimension dimension, const FusionParams& params);

struct GetAdjusted {
  BinaryScores scores;
  std::vector<AdjustmentTrace> traces;  // valence pass, then dominance pass
};

/// Valence pass followed by dominance pass on the running scores.
GetAdjusted ApplyGetAdjustment(const BinaryScores& scores,
                               const GlobalEmotionalTraits& get,
                               const FusionParams& params);

/// Full GET-aided inference for one image. `vads` must hold one entry per
/// detection kept by FilterPersons, in detection order; otherwise throws
/// kMisalignedAnnotations. With no persons the raw scores pass through.
Decision InferImage(const BinaryScores& raw,
                    std::span<const Detection> detections,
                    std::span<const PersonVAD> vads,
                    const FusionParams& params);

/// Baseline decision straight from the classifier.
Decision VanillaDecision(const BinaryScores& raw, const FusionParams& params);

}  // namespace hrfusion

#endif  // HRFUSION_FUSION_HPP
