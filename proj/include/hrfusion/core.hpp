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

// Shared vocabulary: detections, per-person VAD estimates, image-level
// emotional traits, binary abuse scores and the parameters that drive fusion.

#ifndef HRFUSION_CORE_HPP
#define HRFUSION_CORE_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace hrfusion {

enum class ErrorCode {
  kNonFiniteScore,
  kNotAProbabilityPair,
  kInvalidParams,
  kInvalidValue,
  kNoPersons,
  kMisalignedAnnotations,
  kParseError,
  kDuplicateImageId,
  kMissingSidecar,
  kRangeError,
  kInvalidSpec,
  kLengthMismatch,
  kEmptySet,
  kWeightsNotNormalized,
  kMissingMode,
  kMissingGroundTruth,
  kManifestMismatch,
  kExpectationFailed,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception; `code()` lets
// callers (the CLI in particular) map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Range error that remembers which field failed and the rejected value.
class RangeError : public Error {
 public:
  RangeError(std::string field, double value);
  const std::string& field() const noexcept { return field_; }
  double value() const noexcept { return value_; }

 private:
  std::string field_;
  double value_;
};

inline constexpr double kVadMin = 1.0;
inline constexpr double kVadMax = 10.0;
// Tolerance applied to externally supplied probability pairs.
inline constexpr double kInputSumTolerance = 1e-6;
// Tolerance maintained on every constructed BinaryScores.
inline constexpr double kInternalSumTolerance = 1e-9;

inline constexpr std::string_view kPersonLabel = "person";

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  /// Throws kInvalidValue unless coordinates are non-negative and ordered.
  void Validate() const;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  BoundingBox box;
  std::string class_label;
  double confidence = 0.0;

  void Validate() const;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Valence / arousal / dominance of one person, each on the 1..10 scale.
struct PersonVAD {
  double valence = 5.0;
  double arousal = 5.0;
  double dominance = 5.0;

  /// Throws RangeError naming the first dimension outside [1, 10].
  void Validate() const;
  Eigen::Vector3d AsVector() const { return {valence, arousal, dominance}; }
  static PersonVAD FromVector(const Eigen::Vector3d& v) {
    return {v(0), v(1), v(2)};
  }
  friend bool operator==(const PersonVAD&, const PersonVAD&) = default;
};

/// Stacks VAD triples as rows of an n x 3 matrix (V, A, D columns).
using VadMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;
VadMatrix ToMatrix(std::span<const PersonVAD> persons);
std::vector<PersonVAD> FromMatrix(const VadMatrix& m);

/// Image-level mean valence and mean dominance over the detected persons.
struct GlobalEmotionalTraits {
  double valence = 5.0;
  double dominance = 5.0;
  int person_count = 0;

  Eigen::Vector2d AsVector() const { return {valence, dominance}; }
  friend bool operator==(const GlobalEmotionalTraits&,
                         const GlobalEmotionalTraits&) = default;
};

/// (abuse, no-abuse) probability pair. Always sums to one within
/// kInternalSumTolerance and both legs lie in [0, 1].
class BinaryScores {
 public:
  BinaryScores() = default;
  /// Throws kNotAProbabilityPair when the invariant does not hold.
  BinaryScores(double violation, double no_violation);

  double violation() const noexcept { return violation_; }
  double no_violation() const noexcept { return no_violation_; }
  double max() const noexcept {
    return violation_ > no_violation_ ? violation_ : no_violation_;
  }

  friend bool operator==(const BinaryScores&, const BinaryScores&) = default;

 private:
  double violation_ = 0.5;
  double no_violation_ = 0.5;
};

/// Checks an externally supplied pair and repairs rounding-scale drift by
/// renormalising. Throws kNonFiniteScore or kNotAProbabilityPair.
BinaryScores ValidateScores(double violation, double no_violation);

struct FusionParams {
  double adjust_factor = 0.11;
  double neutral_low = 4.5;
  double neutral_high = 5.5;
  double detection_threshold = 0.5;
  double coverage_threshold = 0.75;

  /// Throws kInvalidParams describing the first violated constraint.
  void Validate() const;
  friend bool operator==(const FusionParams&, const FusionParams&) = default;
};

enum class Label { kViolation, kNoViolation };

std::string_view LabelName(Label label);
/// Parses "violation" / "no_violation"; nullopt for anything else.
std::optional<Label> ParseLabel(std::string_view text);

enum class Dimension { kValence, kDominance };
std::string_view DimensionName(Dimension dimension);

/// Audit record of one pass of the GET adjustment.
struct AdjustmentTrace {
  Dimension dimension = Dimension::kValence;
  double delta_from_neutral = 0.0;
  double applied_adjustment = 0.0;
  bool capped = false;

  friend bool operator==(const AdjustmentTrace&,
                         const AdjustmentTrace&) = default;
};

struct Decision {
  Label label = Label::kNoViolation;
  BinaryScores scores;
  std::optional<GlobalEmotionalTraits> get;
  bool covered = false;
  std::vector<AdjustmentTrace> traces;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Ties resolve to kNoViolation.
Label LabelFor(const BinaryScores& scores);
bool IsCovered(const BinaryScores& scores, const FusionParams& params);
Decision MakeDecision(const BinaryScores& scores,
                      std::optional<GlobalEmotionalTraits> get,
                      std::vector<AdjustmentTrace> traces,
                      const FusionParams& params);

}  // namespace hrfusion

#endif  // HRFUSION_CORE_HPP
