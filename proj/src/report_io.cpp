/*
 * Copyright 2026 The ADC Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "adc/report_io.hpp"

#include <json.hpp>

namespace adc {
namespace {

using ojson = nlohmann::ordered_json;
constexpr std::string_view kReportKind = "adc-report";

}  // namespace

std::string serialize_report(const CurationReport& report) {
  ojson h;
  h["kind"] = kReportKind;
  h["version"] = 1;
  h["method"] = report.method;
  h["seed"] = report.seed;
  h["samples"] = report.entries.size();
  h["flagged"] = report.flagged_count();
  h["class_flagged_fraction"] = report.class_flagged_fraction;
  h["warnings"] = report.warnings;
  std::string out = h.dump();
  out.push_back('\n');
  for (const auto& e : report.entries) {
    ojson j;
    j["sample_id"] = e.sample_id;
    j["method"] = report.method;
    j["score"] = e.score;
    j["flag"] = e.flag;
    j["suggested_label"] = e.suggested_label ? ojson(*e.suggested_label) : ojson(nullptr);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

CurationReport parse_report(std::string_view text) {
  CurationReport r;
  bool header = false;
  std::size_t declared = 0;
  try {
    for (const auto& line : split(text, '\n')) {
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw FormatError("report: malformed line");
      if (!header) {
        if (j.value("kind", std::string{}) != kReportKind) throw FormatError("report: missing header");
        if (j.value("version", 0) != 1) throw FormatError("report: unsupported version");
        r.method = j.at("method").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        declared = j.at("samples").get<std::size_t>();
        r.class_flagged_fraction = j.at("class_flagged_fraction").get<std::vector<double>>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        header = true;
        continue;
      }
      CurationEntry e;
      e.sample_id = j.at("sample_id").get<std::string>();
      e.score = j.at("score").get<double>();
      e.flag = j.at("flag").get<bool>();
      if (!j.at("suggested_label").is_null()) e.suggested_label = j["suggested_label"].get<ClassIndex>();
      r.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  if (!header) throw FormatError("report: empty file");
  if (declared != r.entries.size())
    throw FormatError("report: header declares " + std::to_string(declared) + " samples, found " +
                      std::to_string(r.entries.size()));
  return r;
}

void save_report(const CurationReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_report(report));
}

CurationReport load_report(const std::filesystem::path& path) { return parse_report(read_file(path)); }

std::string merge_stats_json(const MergeStats& s) {
  ojson j;
  j["samples"] = s.samples;
  j["methods"] = s.methods;
  j["method_counts"] = s.method_counts;
  j["method_fractions"] = s.method_fractions;
  j["overlap_count"] = s.overlap_count;
  j["overlap_fraction"] = s.overlap_fraction;
  j["combined_count"] = s.combined_count;
  j["combined_fraction"] = s.combined_fraction;
  return j.dump();
}

}  // namespace adc
