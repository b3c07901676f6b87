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
#include <vector>

namespace adc {

enum class ArtifactKind { kEmbedding, kProbability, kManifest, kReport, kBundles, kTaxonomy, kUnknown };

std::string_view to_string(ArtifactKind k);

/// Identifies a file by its magic bytes or header line.
ArtifactKind detect_artifact(const std::filesystem::path& path);

struct Explanation {
  ArtifactKind kind = ArtifactKind::kUnknown;
  std::vector<std::string> lines;
  std::vector<std::string> failures;  // named integrity failures
  bool ok() const { return failures.empty(); }
  std::string text() const;
};

/// Throws FormatError for unrecognised files.
Explanation explain(const std::filesystem::path& path);

}  // namespace adc
