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

#include "hrfusion/report_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace hrfusion {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::optional<double> ParseDouble(std::string s) {
  while (!s.empty() && (s.back() == '%' || s.back() == ' ' || s.back() == '\r')) {
    s.pop_back();
  }
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) return std::nullopt;
  double v = 0.0;
  const char* first = s.data() + start;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

double Pct(double fraction) { return RoundHalfUp(fraction * 100.0, 2); }

ordered_json MeansJson(const MetricMeans& m) {
  return {{"accuracy", Pct(m.accuracy)}, {"coverage", Pct(m.coverage)}};
}

ordered_json DeltaJson(const MetricDelta& d) {
  ordered_json j;
  j["absolute"] = Pct(d.absolute);
  j["relative"] = d.relative ? ordered_json(Pct(*d.relative)) : ordered_json();
  return j;
}

}  // namespace

std::string ReportToCsv(const EvaluationReport& report) {
  std::string out = "config,mode,accuracy,coverage\n";
  for (const ReportRow& r : report.rows) {
    out += CsvField(r.config_name) + "," + std::string(ModeName(r.mode)) + "," +
           FormatPercent(r.accuracy) + "," + FormatPercent(r.coverage) + "\n";
  }
  return out;
}

std::string ReportToJson(const EvaluationReport& report) {
  ordered_json doc;
  doc["manifest"] = report.manifest_name;
  if (report.params) {
    const FusionParams& p = *report.params;
    doc["params"] = {{"adjust_factor", p.adjust_factor},
                     {"neutral_low", p.neutral_low},
                     {"neutral_high", p.neutral_high},
                     {"detection_threshold", p.detection_threshold},
                     {"coverage_threshold", p.coverage_threshold}};
  } else {
    doc["params"] = nullptr;
  }
  doc["units"] = "percent";
  ordered_json rows = ordered_json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"config", r.config_name},
                    {"mode", std::string(ModeName(r.mode))},
                    {"accuracy", Pct(r.accuracy)},
                    {"coverage", Pct(r.coverage)}});
  }
  doc["rows"] = std::move(rows);
  doc["mean"] = {{"vanilla", MeansJson(report.vanilla_mean)},
                 {"get_aid", MeansJson(report.get_aid_mean)}};
  doc["delta"] = {{"accuracy", DeltaJson(report.accuracy_delta)},
                  {"coverage", DeltaJson(report.coverage_delta)}};
  return doc.dump(2) + "\n";
}

LoadedRows ParseRowsCsv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  LoadedRows loaded;
  bool header_seen = false;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParseError,
                origin + ": line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (!header_seen) {
      if (line != "config,mode,accuracy,coverage") {
        fail("expected header config,mode,accuracy,coverage");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 4) fail("expected 4 fields");
    const auto mode = ParseMode(f[1]);
    if (!mode) fail("unknown mode '" + f[1] + "'");
    const auto acc = ParseDouble(f[2]);
    const auto cov = ParseDouble(f[3]);
    if (!acc) fail("accuracy is not a number");
    if (!cov) fail("coverage is not a number");
    loaded.rows.push_back({f[0], *mode, *acc / 100.0, *cov / 100.0});
  }
  if (!header_seen) fail("empty report");
  return loaded;
}

LoadedRows ParseReportJson(const std::string& text, const std::string& origin) {
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::kParseError, origin + ": " + what);
  };
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  LoadedRows loaded;
  try {
    if (doc.contains("manifest") && doc["manifest"].is_string()) {
      loaded.manifest_name = doc["manifest"].get<std::string>();
    }
    if (doc.contains("params") && doc["params"].is_object()) {
      const auto& p = doc["params"];
      FusionParams params;
      params.adjust_factor = p.at("adjust_factor").get<double>();
      params.neutral_low = p.at("neutral_low").get<double>();
      params.neutral_high = p.at("neutral_high").get<double>();
      params.detection_threshold = p.at("detection_threshold").get<double>();
      params.coverage_threshold = p.at("coverage_threshold").get<double>();
      loaded.params = params;
    }
    for (const auto& r : doc.at("rows")) {
      const auto mode = ParseMode(r.at("mode").get<std::string>());
      if (!mode) fail("unknown mode in rows");
      loaded.rows.push_back({r.at("config").get<std::string>(), *mode,
                             r.at("accuracy").get<double>() / 100.0,
                             r.at("coverage").get<double>() / 100.0});
    }
  } catch (const ordered_json::exception& e) {
    fail(std::string("unexpected report layout: ") + e.what());
  }
  return loaded;
}

LoadedRows LoadRows(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kIoError, "report not readable: " + path.string());
  }
  return path.extension() == ".json" ? ParseReportJson(text, path.string())
                                     : ParseRowsCsv(text, path.string());
}

Expectation ParseExpectation(const std::vector<std::string>& fields) {
  if (fields.size() != 4) {
    throw Error(ErrorCode::kInvalidValue,
                "--expect takes: metric mode value tolerance");
  }
  Expectation e{fields[0], fields[1], 0.0, 0.0};
  if (e.metric != "accuracy" && e.metric != "coverage") {
    throw Error(ErrorCode::kInvalidValue,
                "--expect metric must be accuracy or coverage");
  }
  if (e.mode != "vanilla" && e.mode != "get_aid" && e.mode != "delta" &&
      e.mode != "relative") {
    throw Error(ErrorCode::kInvalidValue,
                "--expect mode must be vanilla, get_aid, delta or relative");
  }
  const auto value = ParseDouble(fields[2]);
  const auto tol = ParseDouble(fields[3]);
  if (!value || !tol || *tol < 0.0) {
    throw Error(ErrorCode::kInvalidValue,
                "--expect value and tolerance must be numbers, tolerance >= 0");
  }
  e.value = *value;
  e.tolerance = *tol;
  return e;
}

std::optional<double> ExpectedQuantity(const EvaluationReport& report,
                                       const Expectation& e) {
  const bool accuracy = e.metric == "accuracy";
  if (e.mode == "vanilla" || e.mode == "get_aid") {
    const MetricMeans& m =
        e.mode == "vanilla" ? report.vanilla_mean : report.get_aid_mean;
    return 100.0 * (accuracy ? m.accuracy : m.coverage);
  }
  const MetricDelta& d =
      accuracy ? report.accuracy_delta : report.coverage_delta;
  if (e.mode == "delta") return 100.0 * d.absolute;
  if (!d.relative) return std::nullopt;
  return 100.0 * *d.relative;
}

std::string CheckExpectation(const EvaluationReport& report,
                             const Expectation& e) {
  const auto actual = ExpectedQuantity(report, e);
  std::ostringstream os;
  os << "expected " << e.metric << " " << e.mode << " = " << e.value
     << " +/- " << e.tolerance << ", ";
  if (!actual) return os.str() + "but the relative delta is undefined";
  // Small slack so a tolerance written at the rendered precision is honoured.
  if (std::abs(*actual - e.value) <= e.tolerance + 1e-9) return {};
  os.precision(6);
  os << "got " << *actual;
  return os.str();
}

}  // namespace hrfusion
