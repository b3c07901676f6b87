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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adc/curator.hpp"
#include "adc/manifest.hpp"

namespace adc {

struct ClassDistribution {
  std::vector<std::size_t> counts;
  double rho = 1.0;
  std::size_t n_max = 0;

  std::size_t total() const;
};

/// counts[i] = floor(n_max · rho^(−i/(K−1))), so counts[K−1] = floor(n_max/rho).
ClassDistribution longtail_counts(std::size_t n_max, std::size_t num_classes, double rho);

struct LongtailSubset {
  Manifest manifest;
  /// class_order[r] is the class receiving counts[r].
  std::vector<ClassIndex> class_order;
};

/// Seeded per-class sampling without replacement from fetched records. The
/// class with the most samples receives counts[0]; ties go to the lower index.
LongtailSubset build_longtail_subset(const Manifest& manifest, const ClassDistribution& distribution,
                                     std::uint64_t seed);

struct CleanSubset {
  Manifest manifest;
  MergeStats stats;
  std::size_t removed = 0;
  std::size_t retained = 0;
  double removed_fraction = 0.0;
  double retained_fraction = 0.0;
  std::vector<std::string> warnings;
};

/// Drops samples flagged by the merged reports. Reports must list the
/// fetched records of `manifest` in manifest order.
CleanSubset build_clean_subset(const Manifest& manifest, std::span<const CurationReport> reports,
                               MergeMode mode = MergeMode::kUnion);

struct SplitOptions {
  std::size_t eval_size = 20000;
  std::size_t test_size = 20000;
  std::uint64_t seed = 0;
  bool stratify = true;
  /// Keep only this many (stratified) train rows; the rest become unsplit.
  std::optional<std::size_t> tiny;
};

struct SplitCounts {
  std::size_t train = 0, eval = 0, test = 0, none = 0;
};

/// Assigns a split to every row. Stratified quotas use largest remainders,
/// ties to the lower class.
std::vector<Split> split_labels(std::span<const ClassIndex> labels, const SplitOptions& options);

SplitCounts count_splits(std::span<const Split> splits);

/// Splits the fetched records; other records keep split none.
Manifest split_dataset(const Manifest& manifest, const SplitOptions& options);

/// Largest-remainder apportionment of `total` proportional to `weights`.
std::vector<std::size_t> apportion(std::size_t total, std::span<const std::size_t> weights);

}  // namespace adc
