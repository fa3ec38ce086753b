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

#include "hrfusion/traits.hpp"

#include <algorithm>

namespace hrfusion {

namespace {

bool IsPerson(const Detection& d, const FusionParams& params) {
  return d.class_label == kPersonLabel &&
         d.confidence > params.detection_threshold;
}

// Sorting first makes the sum independent of input order, and clamping to
// the observed range keeps rounding from pushing the mean past min or max.
double OrderFreeMean(Eigen::VectorXd column) {
  std::sort(column.begin(), column.end());
  const double mean = column.sum() / static_cast<double>(column.size());
  return std::clamp(mean, column(0), column(column.size() - 1));
}

}  // namespace

std::vector<Detection> FilterPersons(std::span<const Detection> detections,
                                     const FusionParams& params) {
  std::vector<Detection> out;
  std::copy_if(detections.begin(), detections.end(), std::back_inserter(out),
               [&](const Detection& d) { return IsPerson(d, params); });
  return out;
}

std::size_t CountPersons(std::span<const Detection> detections,
                         const FusionParams& params) {
  return static_cast<std::size_t>(
      std::count_if(detections.begin(), detections.end(),
                    [&](const Detection& d) { return IsPerson(d, params); }));
}

GlobalEmotionalTraits ComputeGet(std::span<const PersonVAD> persons) {
  if (persons.empty()) {
    throw Error(ErrorCode::kNoPersons,
                "emotional traits need at least one person");
  }
  const VadMatrix m = ToMatrix(persons);
  GlobalEmotionalTraits get;
  get.valence = OrderFreeMean(m.col(0));
  get.dominance = OrderFreeMean(m.col(2));
  get.person_count = static_cast<int>(persons.size());
  return get;
}

}  // namespace hrfusion
