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

#include "hrfusion/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrfusion/fusion.hpp"
#include "hrfusion/report_io.hpp"

namespace hrfusion::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Images handled per parallel batch; bounds memory for large manifests.
constexpr std::size_t kBatchSize = 256;

[[noreturn]] void UsageError(const std::string& message) {
  throw Error(ErrorCode::kInvalidValue, message);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. If any call throws,
// the exception of the lowest failing index is rethrown, so failures are
// reported the same way for every worker count.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(workers, 1));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<const ManifestEntry*> ActiveEntries(const DatasetManifest& m) {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : m.entries) {
    if (!e.skipped) out.push_back(&e);
  }
  return out;
}

struct ImageDecisions {
  Decision vanilla;
  Decision get_aid;
};

ImageDecisions DecideImage(const ManifestEntry& entry,
                           const FusionParams& params,
                           const LoadOptions& options) {
  try {
    const ImageAnnotations a = LoadEntry(entry, params, options);
    return {VanillaDecision(a.raw_scores, params),
            InferImage(a.raw_scores, a.detections, a.person_vads, params)};
  } catch (const Error& e) {
    throw Error(e.code(), "image '" + entry.image_id + "': " + e.what());
  }
}

std::string DecisionRecord(const std::string& image_id, Mode mode,
                           const Decision& d) {
  ordered_json j;
  j["image_id"] = image_id;
  j["mode"] = std::string(ModeName(mode));
  j["label"] = std::string(LabelName(d.label));
  j["covered"] = d.covered;
  j["scores"] = {{"violation", d.scores.violation()},
                 {"no_violation", d.scores.no_violation()}};
  if (d.get) {
    j["get"] = {{"valence", d.get->valence},
                {"dominance", d.get->dominance},
                {"person_count", d.get->person_count}};
  }
  ordered_json traces = ordered_json::array();
  for (const AdjustmentTrace& t : d.traces) {
    traces.push_back({{"dimension", std::string(DimensionName(t.dimension))},
                      {"delta_from_neutral", t.delta_from_neutral},
                      {"applied_adjustment", t.applied_adjustment},
                      {"capped", t.capped}});
  }
  j["traces"] = std::move(traces);
  return j.dump();
}

struct Prepared {
  DatasetManifest manifest;
  FusionParams params;
  LoadOptions options;
  std::vector<std::string> warnings;
};

// Validates overrides before touching the manifest, then merges them over the
// manifest's own parameters.
void Prepare(const RunConfig& config, Prepared& p, std::ostream& diag) {
  if (config.worker_count < 1) UsageError("--workers must be positive");
  config.overrides.ApplyTo(FusionParams{}).Validate();
  p.options.strict = config.strict_parsing;
  p.options.warnings = &p.warnings;
  p.manifest = LoadManifest(config.manifest_path, p.options);
  p.params = config.overrides.ApplyTo(p.manifest.params);
  p.params.Validate();
  for (const std::string& w : p.warnings) diag << "warning: " << w << "\n";
  p.warnings.clear();
}

void FlushWarnings(Prepared& p, std::ostream& diag) {
  for (const std::string& w : p.warnings) diag << "warning: " << w << "\n";
  p.warnings.clear();
}

fs::path DefaultOutput(const fs::path& given, const char* filename) {
  if (!given.empty()) return given;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
    return fs::path(dir) / filename;
  }
  return {};
}

// Strips a trailing .csv / .json so `--output report.csv` and
// `--output report` name the same pair of files.
fs::path ReportBase(fs::path base) {
  if (base.extension() == ".csv" || base.extension() == ".json") {
    base.replace_extension();
  }
  return base;
}

void WriteReport(const EvaluationReport& report, const fs::path& base) {
  fs::path csv = base, json = base;
  csv += ".csv";
  json += ".json";
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  WriteFileAtomic(csv, ReportToCsv(report));
  WriteFileAtomic(json, ReportToJson(report));
}

std::string SummaryText(const EvaluationReport& r) {
  std::ostringstream os;
  auto rel = [](const MetricDelta& d) {
    return d.relative ? FormatPercent(*d.relative) + "%" : std::string("n/a");
  };
  os << "accuracy  vanilla " << FormatPercent(r.vanilla_mean.accuracy)
     << "  get_aid " << FormatPercent(r.get_aid_mean.accuracy) << "  delta "
     << FormatPercent(r.accuracy_delta.absolute) << "  relative "
     << rel(r.accuracy_delta) << "\n";
  os << "coverage  vanilla " << FormatPercent(r.vanilla_mean.coverage)
     << "  get_aid " << FormatPercent(r.get_aid_mean.coverage) << "  delta "
     << FormatPercent(r.coverage_delta.absolute) << "  relative "
     << rel(r.coverage_delta) << "\n";
  return os.str();
}

std::vector<PersonVAD> LoadVadList(const fs::path& path) {
  const std::string text = ReadFile(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": malformed JSON: " + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kParseError,
                path.string() + ": expected an array of VAD objects");
  }
  std::vector<PersonVAD> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& v = doc[i];
    PersonVAD p;
    try {
      p = {v.at("valence").get<double>(), v.at("arousal").get<double>(),
           v.at("dominance").get<double>()};
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ": [" + std::to_string(i) +
                      "]: expected numeric valence, arousal, dominance");
    }
    p.Validate();
    out.push_back(p);
  }
  return out;
}

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kExpectationFailed:
      return kExitExpectationFailed;
    case ErrorCode::kInvalidParams:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kInvalidValue:
      return kExitUsage;
    default:
      return kExitData;
  }
}

void AddParamFlags(CLI::App* cmd, ParamOverrides& o) {
  const FusionParams d;
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  cmd->add_option("--adjust-factor", o.adjust_factor,
                  "Score shift per unit of distance from the neutral zone")
      ->default_str(fmt(d.adjust_factor));
  cmd->add_option("--neutral-low", o.neutral_low,
                  "Lower bound of the neutral trait zone (inclusive)")
      ->default_str(fmt(d.neutral_low));
  cmd->add_option("--neutral-high", o.neutral_high,
                  "Upper bound of the neutral trait zone (inclusive)")
      ->default_str(fmt(d.neutral_high));
  cmd->add_option("--detection-threshold", o.detection_threshold,
                  "Person detections must score strictly above this")
      ->default_str(fmt(d.detection_threshold));
  cmd->add_option("--coverage-threshold", o.coverage_threshold,
                  "Minimum winning score for a decision to count as covered")
      ->default_str(fmt(d.coverage_threshold));
}

void AddRunFlags(CLI::App* cmd, RunConfig& c, std::string& output) {
  cmd->add_option("--manifest", c.manifest_path, "Dataset manifest (JSON)")
      ->required();
  cmd->add_option("--output", output, "Output path");
  cmd->add_option("--workers", c.worker_count, "Worker threads")
      ->default_str("1")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", c.strict_parsing,
                "Reject unknown fields in manifest and sidecars");
  AddParamFlags(cmd, c.overrides);
}

}  // namespace

FusionParams ParamOverrides::ApplyTo(FusionParams base) const {
  if (adjust_factor) base.adjust_factor = *adjust_factor;
  if (neutral_low) base.neutral_low = *neutral_low;
  if (neutral_high) base.neutral_high = *neutral_high;
  if (detection_threshold) base.detection_threshold = *detection_threshold;
  if (coverage_threshold) base.coverage_threshold = *coverage_threshold;
  return base;
}

void Classify(const RunConfig& config, std::ostream& out, std::ostream& diag) {
  Prepared p;
  Prepare(config, p, diag);
  const auto entries = ActiveEntries(p.manifest);

  std::vector<ImageDecisions> batch;
  for (std::size_t start = 0; start < entries.size(); start += kBatchSize) {
    const std::size_t n = std::min(kBatchSize, entries.size() - start);
    batch.assign(n, {});
    // Warnings are collected per image and printed in order afterwards.
    std::vector<std::vector<std::string>> warnings(n);
    ParallelFor(n, config.worker_count, [&](std::size_t i) {
      LoadOptions options{p.options.strict, &warnings[i]};
      batch[i] = DecideImage(*entries[start + i], p.params, options);
    });
    for (std::size_t i = 0; i < n; ++i) {
      for (const std::string& w : warnings[i]) diag << "warning: " << w << "\n";
      const std::string& id = entries[start + i]->image_id;
      if (config.mode != RunMode::kGetAid) {
        out << DecisionRecord(id, Mode::kVanilla, batch[i].vanilla) << "\n";
      }
      if (config.mode != RunMode::kVanilla) {
        out << DecisionRecord(id, Mode::kGetAid, batch[i].get_aid) << "\n";
      }
    }
    diag << "processed " << start + n << "/" << entries.size() << " images\n";
  }
  FlushWarnings(p, diag);
}

EvaluationReport Evaluate(const RunConfig& config, std::ostream& diag) {
  Prepared p;
  Prepare(config, p, diag);
  p.manifest.params = p.params;
  GroundTruths(p.manifest);  // fail before doing any inference

  const auto entries = ActiveEntries(p.manifest);
  const std::string name =
      config.config_name.empty() ? p.manifest.name : config.config_name;
  std::pair<RunResult, RunResult> run{{name, Mode::kVanilla, {}},
                                      {name, Mode::kGetAid, {}}};
  std::vector<ImageDecisions> decided(entries.size());
  std::vector<std::vector<std::string>> warnings(entries.size());
  ParallelFor(entries.size(), config.worker_count, [&](std::size_t i) {
    LoadOptions options{p.options.strict, &warnings[i]};
    decided[i] = DecideImage(*entries[i], p.params, options);
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const std::string& w : warnings[i]) diag << "warning: " << w << "\n";
    run.first.decisions.push_back(std::move(decided[i].vanilla));
    run.second.decisions.push_back(std::move(decided[i].get_aid));
  }
  diag << "processed " << entries.size() << " images\n";
  return Summarize(std::span(&run, 1), p.manifest);
}

namespace {

int RunClassify(const RunConfig& config, const std::string& output,
                std::ostream& out, std::ostream& err) {
  const fs::path path = DefaultOutput(output, "decisions.jsonl");
  if (path.empty()) {
    Classify(config, out, err);
    return kExitOk;
  }
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    {
      std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
      if (!file) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
      Classify(config, file, err);
      file.flush();
      if (!file) throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  return kExitOk;
}

int RunEvaluate(const RunConfig& config, const std::string& output,
                std::ostream& out, std::ostream& err) {
  fs::path base = DefaultOutput(output, "report");
  if (base.empty()) base = "report";
  const EvaluationReport report = Evaluate(config, err);
  WriteReport(report, ReportBase(base));
  out << SummaryText(report);
  return kExitOk;
}

int RunCompare(const fs::path& vanilla_path, const fs::path& get_aid_path,
               const std::string& output,
               const std::vector<std::vector<std::string>>& expect_args,
               std::ostream& out, std::ostream& err) {
  std::vector<Expectation> expectations;
  for (const auto& fields : expect_args) {
    expectations.push_back(ParseExpectation(fields));
  }
  const LoadedRows vanilla = LoadRows(vanilla_path);
  const LoadedRows get_aid = LoadRows(get_aid_path);
  if (vanilla.manifest_name && get_aid.manifest_name &&
      *vanilla.manifest_name != *get_aid.manifest_name) {
    throw Error(ErrorCode::kManifestMismatch,
                "results come from different manifests: '" +
                    *vanilla.manifest_name + "' vs '" +
                    *get_aid.manifest_name + "'");
  }

  std::vector<ReportRow> rows;
  std::vector<std::string> vanilla_configs, get_aid_configs;
  for (const ReportRow& r : vanilla.rows) {
    if (r.mode != Mode::kVanilla) continue;
    rows.push_back(r);
    vanilla_configs.push_back(r.config_name);
  }
  for (const ReportRow& r : get_aid.rows) {
    if (r.mode != Mode::kGetAid) continue;
    rows.push_back(r);
    get_aid_configs.push_back(r.config_name);
  }
  std::sort(vanilla_configs.begin(), vanilla_configs.end());
  std::sort(get_aid_configs.begin(), get_aid_configs.end());
  if (vanilla_configs != get_aid_configs) {
    throw Error(ErrorCode::kManifestMismatch,
                "vanilla and get_aid results cover different configurations");
  }

  EvaluationReport report = SummarizeRows(std::move(rows));
  report.manifest_name = vanilla.manifest_name.value_or(
      get_aid.manifest_name.value_or(std::string()));
  report.params = vanilla.params ? vanilla.params : get_aid.params;

  const fs::path base = DefaultOutput(output, "comparison");
  if (!base.empty()) WriteReport(report, ReportBase(base));
  out << SummaryText(report);

  int failures = 0;
  for (const Expectation& e : expectations) {
    const std::string problem = CheckExpectation(report, e);
    if (!problem.empty()) {
      err << "ExpectationFailed: " << problem << "\n";
      ++failures;
    }
  }
  return failures == 0 ? kExitOk : kExitExpectationFailed;
}

int RunFitEnsemble(const fs::path& truth_path,
                   const std::vector<fs::path>& model_paths, double grid_step,
                   const std::string& output, std::ostream& out) {
  if (model_paths.size() < 2) UsageError("fit-ensemble needs at least two --model files");
  const std::vector<PersonVAD> truth = LoadVadList(truth_path);
  std::vector<std::vector<PersonVAD>> models;
  for (const fs::path& m : model_paths) models.push_back(LoadVadList(m));

  const std::vector<double> weights =
      FitEnsembleWeights(models, truth, grid_step);
  ordered_json doc;
  doc["grid_step"] = grid_step;
  doc["weights"] = weights;
  doc["validation_error"] = MeanErrorRate(EnsembleVad(models, weights), truth);
  ordered_json singles = ordered_json::array();
  for (const auto& m : models) singles.push_back(MeanErrorRate(m, truth));
  doc["single_model_errors"] = std::move(singles);
  const std::string text = doc.dump(2) + "\n";

  const fs::path path = DefaultOutput(output, "ensemble_weights.json");
  if (path.empty()) {
    out << text;
  } else {
    WriteFileAtomic(path, text);
  }
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Emotion-aided human rights abuse classification"};
  app.name("hrfusion");
  app.require_subcommand(1);

  RunConfig classify_cfg;
  std::string classify_out;
  std::string mode_text = "both";
  auto* classify = app.add_subcommand(
      "classify", "Write one JSON-lines decision record per image and mode");
  AddRunFlags(classify, classify_cfg, classify_out);
  classify
      ->add_option("--mode", mode_text, "vanilla, get_aid or both")
      ->default_str("both")
      ->check(CLI::IsMember({"vanilla", "get_aid", "both"}));

  RunConfig eval_cfg;
  std::string eval_out;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score vanilla and GET-aided decisions against ground truth");
  AddRunFlags(evaluate, eval_cfg, eval_out);
  evaluate->add_option("--config-name", eval_cfg.config_name,
                       "Row label in the report (default: manifest name)");

  std::string cmp_vanilla, cmp_get_aid, cmp_out;
  std::vector<std::vector<std::string>> expects;
  auto* compare = app.add_subcommand(
      "compare", "Summarise vanilla vs GET-aided result tables");
  compare->add_option("--vanilla", cmp_vanilla, "Vanilla results (CSV or JSON)")
      ->required();
  compare->add_option("--get-aid", cmp_get_aid, "GET-aided results (CSV or JSON)")
      ->required();
  compare->add_option("--output", cmp_out, "Report base path (.csv and .json)");
  compare
      ->add_option("--expect", expects,
                   "metric mode value tolerance; metric: accuracy|coverage, "
                   "mode: vanilla|get_aid|delta|relative, values in percent")
      ->type_size(4)
      ->allow_extra_args(false);

  std::string fit_truth, fit_out;
  std::vector<std::string> fit_models;
  double grid_step = 0.05;
  auto* fit = app.add_subcommand(
      "fit-ensemble", "Fit weighted-average ensemble weights on validation data");
  fit->add_option("--truth", fit_truth, "Validation VAD truth (JSON array)")
      ->required();
  fit->add_option("--model", fit_models,
                  "Per-model VAD predictions (JSON array); repeat per model")
      ->required();
  fit->add_option("--grid-step", grid_step, "Simplex grid spacing")
      ->default_str("0.05");
  fit->add_option("--output", fit_out, "Output file (default: stdout)");

  SynthSpec synth_spec;
  std::uint64_t seed = 42;
  int count = 10;
  std::string synth_dir, synth_name = "synthetic", task_text = "child_labour",
                         rule_text = "fused";
  ParamOverrides synth_params;
  auto* synth = app.add_subcommand(
      "synth", "Generate a seeded synthetic corpus of sidecars and a manifest");
  synth->add_option("--seed", seed, "Seed of the first image")->default_str("42");
  synth->add_option("--count", count, "Number of images")
      ->default_str("10")
      ->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_dir, "Output directory");
  synth->add_option("--name", synth_name, "Manifest name")->default_str("synthetic");
  synth->add_option("--task", task_text, "child_labour or displaced_populations")
      ->default_str("child_labour")
      ->check(CLI::IsMember({"child_labour", "displaced_populations"}));
  synth->add_option("--min-persons", synth_spec.min_persons)->default_str("0");
  synth->add_option("--max-persons", synth_spec.max_persons)->default_str("4");
  synth->add_option("--max-distractors", synth_spec.max_distractors)
      ->default_str("2");
  synth->add_option("--vad-low", synth_spec.vad_low)->default_str("1");
  synth->add_option("--vad-high", synth_spec.vad_high)->default_str("10");
  synth->add_option("--score-low", synth_spec.score_low, "Lowest raw violation score")
      ->default_str("0");
  synth->add_option("--score-high", synth_spec.score_high, "Highest raw violation score")
      ->default_str("1");
  synth->add_option("--truth-rule", rule_text,
                    "fused, raw, violation or no_violation")
      ->default_str("fused")
      ->check(CLI::IsMember({"fused", "raw", "violation", "no_violation"}));
  AddParamFlags(synth, synth_params);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (classify->parsed()) {
      classify_cfg.mode = mode_text == "vanilla"   ? RunMode::kVanilla
                          : mode_text == "get_aid" ? RunMode::kGetAid
                                                   : RunMode::kBoth;
      return RunClassify(classify_cfg, classify_out, out, err);
    }
    if (evaluate->parsed()) return RunEvaluate(eval_cfg, eval_out, out, err);
    if (compare->parsed()) {
      return RunCompare(cmp_vanilla, cmp_get_aid, cmp_out, expects, out, err);
    }
    if (fit->parsed()) {
      std::vector<fs::path> models(fit_models.begin(), fit_models.end());
      return RunFitEnsemble(fit_truth, models, grid_step, fit_out, out);
    }
    if (synth->parsed()) {
      const fs::path dir = DefaultOutput(synth_dir, "synthetic");
      if (dir.empty()) UsageError("synth needs --out or " + std::string(kOutputDirEnv));
      synth_spec.params = synth_params.ApplyTo(FusionParams{});
      synth_spec.truth_rule = *ParseTruthRule(rule_text);
      const fs::path manifest = WriteSyntheticCorpus(
          dir, seed, count, synth_spec, synth_name, *ParseTask(task_text));
      out << manifest.string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

int Run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Run(args, std::cout, std::cerr);
}

}  // namespace hrfusion::cli
