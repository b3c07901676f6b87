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
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "adc/collector.hpp"
#include "adc/config.hpp"
#include "adc/curator.hpp"
#include "adc/manifest.hpp"

namespace adc {

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class StageStatus { kRan, kUpToDate, kSkipped, kFailed };
std::string_view to_string(StageStatus s);

struct StageResult {
  std::string name;
  StageStatus status = StageStatus::kSkipped;
  double seconds = 0.0;
  std::map<std::string, double> counts;
  std::vector<std::string> notes;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::vector<StageResult> stages;
  bool ok = true;
  std::string error;

  const StageResult* stage(std::string_view name) const;
  std::string to_json() const;
};

struct PipelineOptions {
  /// Overrides the configured backend (tests).
  SearchBackend* backend = nullptr;
  /// Ignore stamps and rerun every stage.
  bool force = false;
  std::ostream* log = nullptr;
};

/// Runs design, collect, curate and subset in order. A stage whose inputs
/// and outputs match its stamp is reported up-to-date and not rerun. Writes
/// <output>/run_report.json. Throws StageError after recording the failure.
RunReport run_pipeline(const ProjectConfig& config, const PipelineOptions& options = {});

/// Embedding rows reordered to the manifest's fetched records. Throws when a
/// fetched sample has no row.
EmbeddingMatrix align_embeddings(const EmbeddingMatrix& features, const Manifest& manifest);
DenseMatrix align_rows(const DenseMatrix& m, const Manifest& manifest);

/// Curation over the manifest's fetched records; one report per method.
std::vector<CurationReport> run_curation(const ProjectConfig& config, const Manifest& manifest,
                                         std::size_t num_classes, std::vector<std::string>* notes = nullptr);

}  // namespace adc
