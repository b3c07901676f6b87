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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adc/collector.hpp"
#include "adc/common.hpp"

namespace adc {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Project configuration. YAML file; `inherit_from` names a base file
/// (relative to the including file) whose maps are deep-merged underneath.
/// Relative paths resolve against the directory of the top-level file.
struct ProjectConfig {
  std::filesystem::path source;  // top-level file, empty when built in code
  std::uint64_t seed = 0;
  std::string verbosity = "info";

  // paths
  std::filesystem::path spec;
  std::filesystem::path output;
  std::filesystem::path manifest;    // default <output>/manifest.jsonl
  std::filesystem::path store;       // default <output>/store
  std::filesystem::path reports;     // default <output>/reports
  std::filesystem::path embeddings;  // optional
  std::filesystem::path probs;       // optional

  // collect
  std::string backend = "mock";
  std::filesystem::path corpus;  // local backend root
  std::size_t workers = kDefaultWorkers;
  std::size_t per_query_limit = kDefaultPerQueryLimit;
  MockOptions mock;

  // curate
  std::vector<std::string> methods{"simifeat"};
  std::size_t simifeat_k = 10;
  std::size_t knn_vote_k = 100;
  std::size_t consensus_rounds = 50;
  std::string merge = "union";

  // subset
  bool clean_subset = true;
  std::vector<double> longtail_rhos;
  bool split = false;
  std::size_t eval_size = 20000;
  std::size_t test_size = 20000;
  bool stratify = true;
  std::optional<std::size_t> tiny;

  /// Seed for a named stage, derived from the root seed.
  std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

  /// Throws ConfigError when a referenced input path is missing or a value
  /// is out of range.
  void validate() const;
};

ProjectConfig load_config(const std::filesystem::path& path);
/// Parses YAML text; `base_dir` anchors relative paths and inherit_from.
ProjectConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir);

}  // namespace adc
