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

#pragma once

#include <filesystem>
#include <string>

#include "adc/curator.hpp"

namespace adc {

// Report file: a header line {"kind":"adc-report",...} followed by one
// record per sample with fields in the order
//   sample_id, method, score, flag, suggested_label (null when absent).

std::string serialize_report(const CurationReport& report);
CurationReport parse_report(std::string_view text);

void save_report(const CurationReport& report, const std::filesystem::path& path);
CurationReport load_report(const std::filesystem::path& path);

/// Merge statistics as a single JSON object (used in run reports).
std::string merge_stats_json(const MergeStats& stats);

}  // namespace adc
