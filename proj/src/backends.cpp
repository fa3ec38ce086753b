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

#include "hrfusion/backends.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hrfusion/fusion.hpp"
#include "hrfusion/traits.hpp"

namespace hrfusion {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view TaskName(Task task) {
  return task == Task::kChildLabour ? "child_labour" : "displaced_populations";
}

std::optional<Task> ParseTask(std::string_view text) {
  if (text == "child_labour") return Task::kChildLabour;
  if (text == "displaced_populations") return Task::kDisplacedPopulations;
  return std::nullopt;
}

std::string_view TruthRuleName(TruthRule rule) {
  switch (rule) {
    case TruthRule::kFusedArgmax: return "fused";
    case TruthRule::kRawArgmax: return "raw";
    case TruthRule::kAlwaysViolation: return "violation";
    case TruthRule::kAlwaysNoViolation: return "no_violation";
  }
  return "fused";
}

std::optional<TruthRule> ParseTruthRule(std::string_view text) {
  for (TruthRule r : {TruthRule::kFusedArgmax, TruthRule::kRawArgmax,
                      TruthRule::kAlwaysViolation,
                      TruthRule::kAlwaysNoViolation}) {
    if (TruthRuleName(r) == text) return r;
  }
  return std::nullopt;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

namespace {

// Field-level JSON access with path diagnostics ("detections[2].label").
class Reader {
 public:
  Reader(std::string origin, const LoadOptions& options)
      : origin_(std::move(origin)), options_(options) {}

  [[noreturn]] void Fail(const std::string& where,
                         const std::string& what) const {
    throw Error(ErrorCode::kParseError, origin_ + ": " + where + ": " + what);
  }

  json Parse(const std::string& text) const {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      const std::size_t byte = std::min(e.byte, text.size());
      const auto line =
          1 + std::count(text.begin(),
                         text.begin() + static_cast<std::ptrdiff_t>(
                                            byte > 0 ? byte - 1 : 0),
                         '\n');
      throw Error(ErrorCode::kParseError, origin_ + ": line " +
                                              std::to_string(line) +
                                              ": malformed JSON: " + e.what());
    }
  }

  const json& Object(const json& j, const std::string& where) const {
    if (!j.is_object()) Fail(where, "expected an object");
    return j;
  }

  const json& Field(const json& obj, const std::string& where,
                    const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) Fail(where, std::string("missing field '") + key + "'");
    return *it;
  }

  double Number(const json& obj, const std::string& where,
                const char* key) const {
    const json& v = Field(obj, where, key);
    if (!v.is_number()) Fail(Join(where, key), "expected a number");
    return v.get<double>();
  }

  std::string String(const json& obj, const std::string& where,
                     const char* key) const {
    const json& v = Field(obj, where, key);
    if (!v.is_string()) Fail(Join(where, key), "expected a string");
    return v.get<std::string>();
  }

  const json& Array(const json& obj, const std::string& where,
                    const char* key) const {
    const json& v = Field(obj, where, key);
    if (!v.is_array()) Fail(Join(where, key), "expected an array");
    return v;
  }

  void CheckKeys(const json& obj, const std::string& where,
                 std::initializer_list<std::string_view> allowed) const {
    for (const auto& item : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) !=
          allowed.end()) {
        continue;
      }
      const std::string msg =
          origin_ + ": " + Join(where, item.key()) + ": unknown field";
      if (options_.strict) throw Error(ErrorCode::kParseError, msg);
      if (options_.warnings) options_.warnings->push_back(msg);
    }
  }

  static std::string Join(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
  }
  static std::string Index(const char* key, std::size_t i) {
    return std::string(key) + "[" + std::to_string(i) + "]";
  }

 private:
  std::string origin_;
  const LoadOptions& options_;
};

Detection ParseDetection(const Reader& r, const json& j,
                         const std::string& where) {
  r.Object(j, where);
  r.CheckKeys(j, where, {"box", "label", "confidence"});
  Detection d;
  const json& box = r.Array(j, where, "box");
  if (box.size() != 4 ||
      !std::all_of(box.begin(), box.end(),
                   [](const json& c) { return c.is_number(); })) {
    r.Fail(where + ".box", "expected [x_min, y_min, x_max, y_max]");
  }
  d.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
           box[3].get<double>()};
  d.class_label = r.String(j, where, "label");
  d.confidence = r.Number(j, where, "confidence");
  try {
    d.Validate();
  } catch (const RangeError&) {
    throw;
  } catch (const Error& e) {
    r.Fail(where, e.what());
  }
  return d;
}

PersonVAD ParseVad(const Reader& r, const json& j, const std::string& where) {
  r.Object(j, where);
  r.CheckKeys(j, where, {"valence", "arousal", "dominance"});
  PersonVAD p{r.Number(j, where, "valence"), r.Number(j, where, "arousal"),
              r.Number(j, where, "dominance")};
  p.Validate();
  return p;
}

FusionParams ParseParams(const Reader& r, const json& j) {
  r.Object(j, "params");
  r.CheckKeys(j, "params",
              {"adjust_factor", "neutral_low", "neutral_high",
               "detection_threshold", "coverage_threshold"});
  FusionParams p;
  auto opt = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = r.Number(j, "params", key);
  };
  opt("adjust_factor", p.adjust_factor);
  opt("neutral_low", p.neutral_low);
  opt("neutral_high", p.neutral_high);
  opt("detection_threshold", p.detection_threshold);
  opt("coverage_threshold", p.coverage_threshold);
  return p;
}

json ParamsToJson(const FusionParams& p) {
  json j = json::object();
  j["adjust_factor"] = p.adjust_factor;
  j["neutral_low"] = p.neutral_low;
  j["neutral_high"] = p.neutral_high;
  j["detection_threshold"] = p.detection_threshold;
  j["coverage_threshold"] = p.coverage_threshold;
  return j;
}

}  // namespace

ImageAnnotations ParseAnnotations(const std::string& text,
                                  const std::string& origin,
                                  const LoadOptions& options) {
  Reader r(origin, options);
  const json doc = r.Parse(text);
  r.Object(doc, "(root)");
  r.CheckKeys(doc, "", {"image_id", "detections", "person_vads", "raw_scores"});

  ImageAnnotations a;
  a.image_id = r.String(doc, "", "image_id");
  if (a.image_id.empty()) r.Fail("image_id", "must be non-empty");

  const json& detections = r.Array(doc, "", "detections");
  for (std::size_t i = 0; i < detections.size(); ++i) {
    a.detections.push_back(
        ParseDetection(r, detections[i], Reader::Index("detections", i)));
  }
  const json& vads = r.Array(doc, "", "person_vads");
  for (std::size_t i = 0; i < vads.size(); ++i) {
    a.person_vads.push_back(
        ParseVad(r, vads[i], Reader::Index("person_vads", i)));
  }

  const json& scores = r.Object(r.Field(doc, "", "raw_scores"), "raw_scores");
  r.CheckKeys(scores, "raw_scores", {"violation", "no_violation"});
  a.raw_scores = ValidateScores(r.Number(scores, "raw_scores", "violation"),
                                r.Number(scores, "raw_scores", "no_violation"));
  return a;
}

ImageAnnotations LoadAnnotations(const fs::path& path,
                                 const LoadOptions& options) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kMissingSidecar,
                "sidecar not readable: " + path.string());
  }
  return ParseAnnotations(text, path.string(), options);
}

std::string AnnotationsToJson(const ImageAnnotations& a) {
  nlohmann::ordered_json doc;
  doc["image_id"] = a.image_id;
  nlohmann::ordered_json dets = nlohmann::ordered_json::array();
  for (const Detection& d : a.detections) {
    dets.push_back({{"box", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}},
                    {"label", d.class_label},
                    {"confidence", d.confidence}});
  }
  doc["detections"] = std::move(dets);
  nlohmann::ordered_json vads = nlohmann::ordered_json::array();
  for (const PersonVAD& p : a.person_vads) {
    vads.push_back({{"valence", p.valence},
                    {"arousal", p.arousal},
                    {"dominance", p.dominance}});
  }
  doc["person_vads"] = std::move(vads);
  doc["raw_scores"] = {{"violation", a.raw_scores.violation()},
                       {"no_violation", a.raw_scores.no_violation()}};
  return doc.dump(2) + "\n";
}

void SaveAnnotations(const ImageAnnotations& a, const fs::path& path) {
  WriteFileAtomic(path, AnnotationsToJson(a));
}

DatasetManifest LoadManifest(const fs::path& path, const LoadOptions& options) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kIoError, "manifest not readable: " + path.string());
  }
  Reader r(path.string(), options);
  const json doc = r.Parse(text);
  r.Object(doc, "(root)");
  r.CheckKeys(doc, "", {"name", "task", "params", "entries"});

  DatasetManifest m;
  m.name = r.String(doc, "", "name");
  const std::string task = r.String(doc, "", "task");
  const auto parsed_task = ParseTask(task);
  if (!parsed_task) r.Fail("task", "unknown task '" + task + "'");
  m.task = *parsed_task;
  if (doc.contains("params")) m.params = ParseParams(r, doc["params"]);
  try {
    m.params.Validate();
  } catch (const Error& e) {
    r.Fail("params", e.what());
  }

  const json& entries = r.Array(doc, "", "entries");
  if (entries.empty()) r.Fail("entries", "must be non-empty");
  const fs::path base = path.parent_path();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = Reader::Index("entries", i);
    const json& e = r.Object(entries[i], where);
    r.CheckKeys(e, where,
                {"image_id", "sidecar", "ground_truth", "skipped", "reason"});
    ManifestEntry entry;
    entry.image_id = r.String(e, where, "image_id");
    if (entry.image_id.empty()) r.Fail(where + ".image_id", "must be non-empty");
    if (!seen.insert(entry.image_id).second) {
      throw Error(ErrorCode::kDuplicateImageId,
                  path.string() + ": duplicate image_id '" + entry.image_id +
                      "' at " + where);
    }
    if (e.contains("skipped")) {
      if (!e["skipped"].is_boolean()) r.Fail(where + ".skipped", "expected a boolean");
      entry.skipped = e["skipped"].get<bool>();
    }
    if (e.contains("reason")) entry.skip_reason = r.String(e, where, "reason");

    if (e.contains("ground_truth") && !e["ground_truth"].is_null()) {
      const std::string gt = r.String(e, where, "ground_truth");
      entry.ground_truth = ParseLabel(gt);
      if (!entry.ground_truth) {
        r.Fail(where + ".ground_truth", "unknown label '" + gt + "'");
      }
    }
    if (!entry.skipped) {
      const fs::path sidecar = r.String(e, where, "sidecar");
      entry.sidecar = sidecar.is_absolute() ? sidecar : base / sidecar;
      if (!fs::is_regular_file(entry.sidecar)) {
        throw Error(ErrorCode::kMissingSidecar,
                    path.string() + ": " + where + ": missing sidecar " +
                        entry.sidecar.string());
      }
    } else if (e.contains("sidecar") && e["sidecar"].is_string()) {
      entry.sidecar = base / e["sidecar"].get<std::string>();
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void SaveManifest(const DatasetManifest& m, const fs::path& path) {
  json doc;
  doc["name"] = m.name;
  doc["task"] = std::string(TaskName(m.task));
  doc["params"] = ParamsToJson(m.params);
  json entries = json::array();
  const fs::path base = path.parent_path();
  for (const ManifestEntry& e : m.entries) {
    json j;
    j["image_id"] = e.image_id;
    if (!e.sidecar.empty()) {
      const fs::path rel = e.sidecar.lexically_relative(base);
      j["sidecar"] = (rel.empty() || *rel.begin() == "..") ? e.sidecar.string()
                                                           : rel.string();
    }
    j["ground_truth"] = e.ground_truth
                            ? json(std::string(LabelName(*e.ground_truth)))
                            : json(nullptr);
    if (e.skipped) {
      j["skipped"] = true;
      j["reason"] = e.skip_reason;
    }
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  WriteFileAtomic(path, doc.dump(2) + "\n");
}

ImageAnnotations LoadEntry(const ManifestEntry& entry,
                           const FusionParams& params,
                           const LoadOptions& options) {
  ImageAnnotations a = LoadAnnotations(entry.sidecar, options);
  if (a.image_id != entry.image_id) {
    throw Error(ErrorCode::kParseError,
                entry.sidecar.string() + ": image_id '" + a.image_id +
                    "' does not match manifest entry '" + entry.image_id + "'");
  }
  const std::size_t persons = CountPersons(a.detections, params);
  if (persons != a.person_vads.size()) {
    throw Error(ErrorCode::kMisalignedAnnotations,
                entry.sidecar.string() + ": " +
                    std::to_string(a.person_vads.size()) +
                    " person_vads for " + std::to_string(persons) +
                    " person detections");
  }
  a.ground_truth = entry.ground_truth;
  return a;
}

// --- synthetic generation -------------------------------------------------

void SynthSpec::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidSpec, "invalid synthesis spec: " + what);
  };
  if (min_persons < 0 || max_persons < min_persons) {
    fail("need 0 <= min_persons <= max_persons");
  }
  if (max_distractors < 0) fail("max_distractors must be non-negative");
  if (!(kVadMin <= vad_low && vad_low <= vad_high && vad_high <= kVadMax)) {
    fail("need 1 <= vad_low <= vad_high <= 10");
  }
  if (!(0.0 <= score_low && score_low <= score_high && score_high <= 1.0)) {
    fail("need 0 <= score_low <= score_high <= 1");
  }
  try {
    params.Validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (max_persons > 0 && params.detection_threshold >= 1.0) {
    fail("no person can pass a detection threshold of 1");
  }
}

namespace {

// Draws straight from the 64-bit engine so the stream is identical on every
// standard library (std distributions are implementation-defined).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Unit(); }
  // Uniform on (lo, hi].
  double UniformOpenLow(double lo, double hi) {
    return lo + (hi - lo) * (1.0 - Unit());
  }
  int Int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::array<const char*, 5> kDistractorLabels = {
    "dog", "car", "chair", "bicycle", "backpack"};

BoundingBox RandomBox(SynthRng& rng) {
  BoundingBox b;
  b.x_min = rng.Uniform(0.0, 600.0);
  b.y_min = rng.Uniform(0.0, 400.0);
  b.x_max = b.x_min + rng.Uniform(8.0, 200.0);
  b.y_max = b.y_min + rng.Uniform(8.0, 300.0);
  return b;
}

}  // namespace

ImageAnnotations SynthesizeCase(std::uint64_t seed, const SynthSpec& spec) {
  spec.Validate();
  SynthRng rng(seed);
  const double threshold = spec.params.detection_threshold;

  ImageAnnotations a;
  a.image_id = "synth-" + std::to_string(seed);

  const int persons = rng.Int(spec.min_persons, spec.max_persons);
  const int distractors = rng.Int(0, spec.max_distractors);

  // true marks a person that passes the filter.
  std::vector<bool> slots(static_cast<std::size_t>(persons), true);
  slots.resize(static_cast<std::size_t>(persons + distractors), false);
  for (std::size_t i = slots.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.Int(0, static_cast<int>(i) - 1));
    const bool tmp = slots[i - 1];
    slots[i - 1] = slots[j];
    slots[j] = tmp;
  }

  for (const bool is_person : slots) {
    Detection d;
    d.box = RandomBox(rng);
    if (is_person) {
      d.class_label = std::string(kPersonLabel);
      d.confidence = rng.UniformOpenLow(threshold, 1.0);
      a.person_vads.push_back({rng.Uniform(spec.vad_low, spec.vad_high),
                               rng.Uniform(spec.vad_low, spec.vad_high),
                               rng.Uniform(spec.vad_low, spec.vad_high)});
    } else if (rng.Unit() < 0.5) {
      d.class_label = kDistractorLabels[static_cast<std::size_t>(
          rng.Int(0, static_cast<int>(kDistractorLabels.size()) - 1))];
      d.confidence = rng.Unit();
    } else {
      d.class_label = std::string(kPersonLabel);
      d.confidence = rng.Uniform(0.0, threshold);
    }
    a.detections.push_back(std::move(d));
  }

  const double p = rng.Uniform(spec.score_low, spec.score_high);
  a.raw_scores = BinaryScores(p, 1.0 - p);

  switch (spec.truth_rule) {
    case TruthRule::kFusedArgmax:
      a.ground_truth =
          InferImage(a.raw_scores, a.detections, a.person_vads, spec.params)
              .label;
      break;
    case TruthRule::kRawArgmax:
      a.ground_truth = LabelFor(a.raw_scores);
      break;
    case TruthRule::kAlwaysViolation:
      a.ground_truth = Label::kViolation;
      break;
    case TruthRule::kAlwaysNoViolation:
      a.ground_truth = Label::kNoViolation;
      break;
  }
  return a;
}

fs::path WriteSyntheticCorpus(const fs::path& directory,
                              std::uint64_t first_seed, int count,
                              const SynthSpec& spec, const std::string& name,
                              Task task) {
  if (count <= 0) {
    throw Error(ErrorCode::kInvalidSpec, "corpus size must be positive");
  }
  spec.Validate();
  fs::create_directories(directory);
  DatasetManifest m;
  m.name = name;
  m.task = task;
  m.params = spec.params;
  for (int i = 0; i < count; ++i) {
    const ImageAnnotations a =
        SynthesizeCase(first_seed + static_cast<std::uint64_t>(i), spec);
    const fs::path sidecar = directory / (a.image_id + ".json");
    SaveAnnotations(a, sidecar);
    m.entries.push_back({a.image_id, sidecar, a.ground_truth, false, {}});
  }
  const fs::path manifest = directory / "manifest.json";
  SaveManifest(m, manifest);
  return manifest;
}

}  // namespace hrfusion
