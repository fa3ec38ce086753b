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

#ifndef HRFUSION_TRAITS_HPP
#define HRFUSION_TRAITS_HPP

#include <span>
#include <vector>

#include "hrfusion/core.hpp"

namespace hrfusion {

/// Keeps detections labelled exactly "person" whose confidence is strictly
/// above `params.detection_threshold`. Input order is preserved.
std::vector<Detection> FilterPersons(std::span<const Detection> detections,
                                     const FusionParams& params);

/// Number of detections FilterPersons would keep.
std::size_t CountPersons(std::span<const Detection> detections,
                         const FusionParams& params);

/// Mean valence and mean dominance over `persons`. Arousal is not used.
/// Throws kNoPersons on an empty list.
GlobalEmotionalTraits ComputeGet(std::span<const PersonVAD> persons);

/// Product form of the two traits (valence x dominance).
inline double GetPairScore(const GlobalEmotionalTraits& get) {
  return get.valence * get.dominance;
}

}  // namespace hrfusion

#endif  // HRFUSION_TRAITS_HPP
