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

#include "adc/common.hpp"
#include "adc/embedstore.hpp"
#include "adc/transition.hpp"

namespace adc {

struct CurationEntry {
  std::string sample_id;
  double score = 0.0;
  bool flag = false;
  std::optional<ClassIndex> suggested_label;

  friend bool operator==(const CurationEntry&, const CurationEntry&) = default;
};

/// Per-sample detector output aligned to the input rows.
struct CurationReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<CurationEntry> entries;
  /// Flagged fraction per noisy class; 0 for classes without samples.
  std::vector<double> class_flagged_fraction;
  std::vector<std::string> warnings;

  std::size_t size() const { return entries.size(); }
  std::size_t flagged_count() const;
  double flagged_fraction() const;
  std::vector<bool> flags() const;
};

/// Fills class_flagged_fraction from the entries.
void summarize(CurationReport& report, std::span<const ClassIndex> labels, std::size_t num_classes);

inline constexpr std::size_t kSimiFeatK = 10;
inline constexpr std::size_t kKnnVoteK = 100;
inline constexpr std::size_t kRelabelK = 10;

/// Ranks samples by similarity-weighted neighbour agreement with their own
/// label (weights (1 + cos) / 2) and flags, per noisy class j, the
/// round(N_j · (1 − P(Y=j | Ỹ=j))) lowest-ranked samples. The posterior comes
/// from `t_est` by Bayes.
CurationReport simifeat_detect(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               const TransitionEstimate& t_est, std::size_t k = kSimiFeatK);
CurationReport simifeat_detect(const std::vector<NeighborList>& neighbors,
                               std::span<const std::string> ids, std::span<const ClassIndex> labels,
                               const TransitionEstimate& t_est);

/// Flags a sample when more than half of its k neighbours carry a different
/// label. Score is the share of the most common neighbour label.
CurationReport knn_vote_detect(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               std::size_t num_classes, std::size_t k = kKnnVoteK);

/// Confident-learning rule with per-class mean self-confidence thresholds.
CurationReport confident_learning_detect(const DenseMatrix& probs, std::span<const ClassIndex> labels);

enum class CoresSign { kFlagAbove, kFlagBelow };

/// score = −log p[ỹ] − mean_j(−log p[j]). kFlagAbove flags score > 0.
CurationReport cores_score_detect(const DenseMatrix& probs, std::span<const ClassIndex> labels,
                                  CoresSign sign = CoresSign::kFlagAbove);

/// Flags exactly floor(x·N/100) lowest-confidence samples, ties to the lower
/// index. Requires 0 < x < 100.
CurationReport confidence_percentile_filter(const DenseMatrix& probs,
                                            std::span<const ClassIndex> labels,
                                            double x_percent = 25.0);

/// For every flagged sample: majority label among its k neighbours that are
/// not flagged themselves. Ties go to the larger summed similarity, then the
/// lower class. No unflagged neighbour leaves the sample unresolved.
CurationReport knn_relabel(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                           const CurationReport& report, std::size_t k = kRelabelK);

enum class MergeMode { kUnion, kIntersection };

struct MergeStats {
  std::size_t samples = 0;
  std::vector<std::string> methods;
  std::vector<std::size_t> method_counts;
  std::vector<double> method_fractions;
  std::size_t overlap_count = 0;  // flagged by every input
  double overlap_fraction = 0.0;
  std::size_t combined_count = 0;
  double combined_fraction = 0.0;
};

struct MergeResult {
  CurationReport report;
  MergeStats stats;
};

/// Union or intersection of flags across reports aligned by sample id.
MergeResult merge_filters(std::span<const CurationReport> reports, MergeMode mode = MergeMode::kUnion);

std::string_view to_string(MergeMode mode);
MergeMode parse_merge_mode(std::string_view s);

/// Row ids of a probability matrix, or "0".."N-1" when it has none.
std::vector<std::string> row_ids_or_index(const DenseMatrix& m);

}  // namespace adc
