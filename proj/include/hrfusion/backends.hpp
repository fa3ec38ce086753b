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

// Annotation sources: JSON sidecar/manifest files on disk and a seeded
// synthetic generator. Both produce ImageAnnotations.
//
// Sidecar (one per image):
//   {"image_id": "...",
//    "detections": [{"box": [x0, y0, x1, y1], "label": "person",
//                    "confidence": 0.9}, ...],
//    "person_vads": [{"valence": v, "arousal": a, "dominance": d}, ...],
//    "raw_scores": {"violation": p, "no_violation": q}}
//
// person_vads is aligned with the detections that survive FilterPersons,
// in detection order.
//
// Manifest:
//   {"name": "...", "task": "child_labour" | "displaced_populations",
//    "params": {FusionParams fields, all optional},
//    "entries": [{"image_id": "...", "sidecar": "relative/path.json",
//                 "ground_truth": "violation" | "no_violation" | null}]}

#ifndef HRFUSION_BACKENDS_HPP
#define HRFUSION_BACKENDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hrfusion/core.hpp"

namespace hrfusion {

struct ImageAnnotations {
  std::string image_id;
  std::vector<Detection> detections;
  std::vector<PersonVAD> person_vads;
  BinaryScores raw_scores;
  std::optional<Label> ground_truth;

  friend bool operator==(const ImageAnnotations&,
                         const ImageAnnotations&) = default;
};

enum class Task { kChildLabour, kDisplacedPopulations };
std::string_view TaskName(Task task);
std::optional<Task> ParseTask(std::string_view text);

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path sidecar;  // resolved against the manifest directory
  std::optional<Label> ground_truth;
  // Entries an exporter could not process; they carry no sidecar and are
  // excluded from inference.
  bool skipped = false;
  std::string skip_reason;
};

struct DatasetManifest {
  std::string name;
  Task task = Task::kChildLabour;
  std::vector<ManifestEntry> entries;
  FusionParams params;
};

struct LoadOptions {
  // Unknown fields are errors when strict, otherwise recorded in `warnings`.
  bool strict = false;
  std::vector<std::string>* warnings = nullptr;
};

/// Throws kParseError, kRangeError (as RangeError) or kNotAProbabilityPair.
ImageAnnotations ParseAnnotations(const std::string& text,
                                  const std::string& origin,
                                  const LoadOptions& options = {});
ImageAnnotations LoadAnnotations(const std::filesystem::path& path,
                                 const LoadOptions& options = {});
std::string AnnotationsToJson(const ImageAnnotations& annotations);
void SaveAnnotations(const ImageAnnotations& annotations,
                     const std::filesystem::path& path);

/// Throws kParseError, kDuplicateImageId, kMissingSidecar, kInvalidParams.
DatasetManifest LoadManifest(const std::filesystem::path& path,
                             const LoadOptions& options = {});
/// Sidecar paths are written relative to the manifest directory when possible.
void SaveManifest(const DatasetManifest& manifest,
                  const std::filesystem::path& path);

/// Loads the sidecar behind `entry`, checks that its image_id matches and that
/// person_vads aligns with the persons `params` keeps, and attaches the
/// manifest's ground truth.
ImageAnnotations LoadEntry(const ManifestEntry& entry,
                           const FusionParams& params,
                           const LoadOptions& options = {});

// Synthetic corpora.

enum class TruthRule {
  kFusedArgmax,  // label of the GET-aided decision under `params`
  kRawArgmax,    // label of the raw classifier scores
  kAlwaysViolation,
  kAlwaysNoViolation,
};
std::string_view TruthRuleName(TruthRule rule);
std::optional<TruthRule> ParseTruthRule(std::string_view text);

struct SynthSpec {
  int min_persons = 0;
  int max_persons = 4;
  int max_distractors = 2;  // non-person or below-threshold detections
  double vad_low = 1.0;
  double vad_high = 10.0;
  double score_low = 0.0;  // violation probability drawn from this range
  double score_high = 1.0;
  TruthRule truth_rule = TruthRule::kFusedArgmax;
  FusionParams params;

  /// Throws kInvalidSpec.
  void Validate() const;
};

/// Pure function of (seed, spec).
ImageAnnotations SynthesizeCase(std::uint64_t seed, const SynthSpec& spec);

/// Writes `count` cases (seeds first_seed, first_seed + 1, ...) as sidecars in
/// `directory` plus `manifest.json`, and returns the manifest path.
std::filesystem::path WriteSyntheticCorpus(const std::filesystem::path& directory,
                                           std::uint64_t first_seed, int count,
                                           const SynthSpec& spec,
                                           const std::string& name, Task task);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents);
std::string ReadFile(const std::filesystem::path& path);

}  // namespace hrfusion

#endif  // HRFUSION_BACKENDS_HPP
