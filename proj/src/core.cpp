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

#include "hrfusion/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hrfusion {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFiniteScore: return "NonFiniteScore";
    case ErrorCode::kNotAProbabilityPair: return "NotAProbabilityPair";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kNoPersons: return "NoPersons";
    case ErrorCode::kMisalignedAnnotations: return "MisalignedAnnotations";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateImageId: return "DuplicateImageId";
    case ErrorCode::kMissingSidecar: return "MissingSidecar";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kWeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::kMissingMode: return "MissingMode";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kManifestMismatch: return "ManifestMismatch";
    case ErrorCode::kExpectationFailed: return "ExpectationFailed";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string RangeMessage(const std::string& field, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "RangeError(\"" << field << "\", " << value << ")";
  return os.str();
}

}  // namespace

RangeError::RangeError(std::string field, double value)
    : Error(ErrorCode::kRangeError, RangeMessage(field, value)),
      field_(std::move(field)),
      value_(value) {}

void BoundingBox::Validate() const {
  for (double c : {x_min, y_min, x_max, y_max}) {
    if (!std::isfinite(c) || c < 0.0) {
      throw Error(ErrorCode::kInvalidValue,
                  "bounding box coordinates must be finite and non-negative");
    }
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw Error(ErrorCode::kInvalidValue,
                "bounding box requires x_min < x_max and y_min < y_max");
  }
}

void Detection::Validate() const {
  box.Validate();
  if (class_label.empty()) {
    throw Error(ErrorCode::kInvalidValue, "detection class label is empty");
  }
  if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0) {
    throw RangeError("confidence", confidence);
  }
}

void PersonVAD::Validate() const {
  auto check = [](const char* field, double v) {
    if (!std::isfinite(v) || v < kVadMin || v > kVadMax) {
      throw RangeError(field, v);
    }
  };
  check("valence", valence);
  check("arousal", arousal);
  check("dominance", dominance);
}

VadMatrix ToMatrix(std::span<const PersonVAD> persons) {
  VadMatrix m(static_cast<Eigen::Index>(persons.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = persons[static_cast<std::size_t>(i)].AsVector().transpose();
  }
  return m;
}

std::vector<PersonVAD> FromMatrix(const VadMatrix& m) {
  std::vector<PersonVAD> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.push_back(PersonVAD::FromVector(m.row(i).transpose()));
  }
  return out;
}

BinaryScores::BinaryScores(double violation, double no_violation)
    : violation_(violation), no_violation_(no_violation) {
  const bool in_range = violation >= 0.0 && violation <= 1.0 &&
                        no_violation >= 0.0 && no_violation <= 1.0;
  if (!in_range ||
      std::abs(violation + no_violation - 1.0) > kInternalSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "scores (" << violation << ", " << no_violation
       << ") are not a probability pair";
    throw Error(ErrorCode::kNotAProbabilityPair, os.str());
  }
}

BinaryScores ValidateScores(double violation, double no_violation) {
  if (!std::isfinite(violation) || !std::isfinite(no_violation)) {
    throw Error(ErrorCode::kNonFiniteScore, "scores must be finite");
  }
  const double sum = violation + no_violation;
  auto outside = [](double v) {
    return v < -kInternalSumTolerance || v > 1.0 + kInternalSumTolerance;
  };
  if (outside(violation) || outside(no_violation) ||
      std::abs(sum - 1.0) > kInputSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "scores (" << violation << ", " << no_violation << ") sum to "
       << sum << ", expected 1";
    throw Error(ErrorCode::kNotAProbabilityPair, os.str());
  }
  double v = std::clamp(violation / sum, 0.0, 1.0);
  double nv = std::clamp(no_violation / sum, 0.0, 1.0);
  return BinaryScores(v, nv);
}

void FusionParams::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidParams, "invalid fusion parameters: " + what);
  };
  for (double v : {adjust_factor, neutral_low, neutral_high,
                   detection_threshold, coverage_threshold}) {
    if (!std::isfinite(v)) fail("values must be finite");
  }
  if (!(kVadMin <= neutral_low && neutral_low < neutral_high &&
        neutral_high <= kVadMax)) {
    fail("need 1 <= neutral_low < neutral_high <= 10");
  }
  // A zero factor is accepted: it degrades GET-aided inference to vanilla.
  if (adjust_factor < 0.0) fail("adjust_factor must be non-negative");
  if (detection_threshold < 0.0 || detection_threshold > 1.0) {
    fail("detection_threshold must lie in [0, 1]");
  }
  if (coverage_threshold < 0.0 || coverage_threshold > 1.0) {
    fail("coverage_threshold must lie in [0, 1]");
  }
}

std::string_view LabelName(Label label) {
  return label == Label::kViolation ? "violation" : "no_violation";
}

std::optional<Label> ParseLabel(std::string_view text) {
  if (text == "violation") return Label::kViolation;
  if (text == "no_violation") return Label::kNoViolation;
  return std::nullopt;
}

std::string_view DimensionName(Dimension dimension) {
  return dimension == Dimension::kValence ? "valence" : "dominance";
}

Label LabelFor(const BinaryScores& scores) {
  return scores.violation() > scores.no_violation() ? Label::kViolation
                                                    : Label::kNoViolation;
}

bool IsCovered(const BinaryScores& scores, const FusionParams& params) {
  return scores.max() >= params.coverage_threshold;
}

Decision MakeDecision(const BinaryScores& scores,
                      std::optional<GlobalEmotionalTraits> get,
                      std::vector<AdjustmentTrace> traces,
                      const FusionParams& params) {
  Decision d;
  d.scores = scores;
  d.label = LabelFor(scores);
  d.covered = IsCovered(scores, params);
  d.get = get;
  d.traces = std::move(traces);
  return d;
}

}  // namespace hrfusion
