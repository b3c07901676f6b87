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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adc/manifest.hpp"

namespace adc {

enum class Vote { kYes, kUnsure, kNo };

std::string_view to_string(Vote v);
Vote parse_vote(std::string_view s);

/// Human judgement of one sample's label (normally three votes).
struct VoteRecord {
  std::string sample_id;
  std::vector<Vote> votes;
  std::vector<std::string> annotator_ids;  // empty or one per vote

  friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

enum class AggregationPolicy { kMajority, kStrict };

std::string_view to_string(AggregationPolicy p);
AggregationPolicy parse_policy(std::string_view s);

/// Order-insensitive buckets. YYN is the only majority-clean bucket that
/// contains a "no"; YYU counts clean and unambiguous.
enum class VotePattern { kYYY, kYYU, kYYN, kElse };
inline constexpr std::size_t kPatternCount = 4;

std::string_view to_string(VotePattern p);

VotePattern canonical_pattern(std::span<const Vote> votes);

/// majority: clean iff at least two "yes" (one for single-vote records);
/// strict: clean iff every vote is "yes".
bool is_clean(std::span<const Vote> votes, AggregationPolicy policy);

struct VoteDistribution {
  std::array<std::size_t, kPatternCount> counts{};
  std::size_t total = 0;

  double fraction(VotePattern p) const;
  std::array<double, kPatternCount> fractions() const;
};

struct Verdict {
  std::string sample_id;
  bool clean = false;
  VotePattern pattern = VotePattern::kElse;
};

struct AggregationResult {
  std::vector<Verdict> verdicts;
  VoteDistribution distribution;
  std::size_t clean = 0;
  std::size_t noisy = 0;
  /// annotator id -> counts of {yes, unsure, no}
  std::map<std::string, std::array<std::size_t, 3>> annotator_counts;

  double clean_fraction() const;
};

/// Throws ValidationError on empty vote lists, more than `max_votes` votes,
/// or annotator id count mismatch.
AggregationResult aggregate_votes(std::span<const VoteRecord> records, AggregationPolicy policy,
                                  std::size_t max_votes = 3);

struct NoiseInterval {
  double lower = 0.0;      // majority-noisy ("else")
  double upper = 0.0;      // lower + ambiguity
  double ambiguity = 0.0;  // majority-clean with a "no" (YYN)
};

/// Fractions indexed by VotePattern; must sum to 1 within 1e-9.
NoiseInterval estimate_noise_interval(const std::array<double, kPatternCount>& fractions);
NoiseInterval estimate_noise_interval(const VoteDistribution& distribution);

// Votes file: "sample_id,vote,vote,vote[;annotator,annotator,annotator]".
std::string serialize_votes(std::span<const VoteRecord> records);
std::vector<VoteRecord> parse_votes(std::string_view text);
std::vector<VoteRecord> load_votes(const std::filesystem::path& path);
void save_votes(std::span<const VoteRecord> records, const std::filesystem::path& path);

// Filter task bundles ------------------------------------------------------

struct FilterGroup {
  std::string group_id;
  ClassIndex machine_label = 0;
  std::string class_name;
  std::size_t hit = 0;  // which HIT (bundle of tasks) the group belongs to
  std::size_t min_select = 4;
  std::vector<std::string> sample_ids;
  std::vector<std::string> uris;

  friend bool operator==(const FilterGroup&, const FilterGroup&) = default;
};

struct FilterBundleOptions {
  std::size_t group_size = 20;
  std::size_t min_select = 4;
  std::size_t tasks_per_bundle = 10;
  std::uint64_t seed = 0;
  /// Only records with this split; all fetched records when unset.
  std::optional<Split> split;
};

struct FilterBundleSet {
  std::uint64_t seed = 0;
  std::size_t group_size = 20;
  std::size_t min_select = 4;
  std::size_t tasks_per_bundle = 10;
  std::string instructions;
  std::vector<FilterGroup> groups;
  std::vector<std::string> warnings;  // not serialized

  friend bool operator==(const FilterBundleSet& a, const FilterBundleSet& b) {
    return a.seed == b.seed && a.group_size == b.group_size && a.min_select == b.min_select &&
           a.tasks_per_bundle == b.tasks_per_bundle && a.instructions == b.instructions &&
           a.groups == b.groups;
  }
};

/// Groups fetched samples sharing a webly label into seeded groups of
/// `group_size`. Classes smaller than a group are skipped with a warning;
/// leftovers that do not fill a group are not exported.
FilterBundleSet export_filter_bundles(const Manifest& manifest, const FilterBundleOptions& options,
                                      const TaxonomySpec* taxonomy = nullptr);

std::string serialize_bundles(const FilterBundleSet& set);
FilterBundleSet parse_bundles(std::string_view text);

struct FilterSelection {
  std::string group_id;
  std::vector<std::string> selected;
};

// Selections file: "group_id,sample_id,sample_id,..." per line.
std::vector<FilterSelection> parse_selections(std::string_view text);
std::string serialize_selections(std::span<const FilterSelection> selections);

struct ImportReport {
  std::size_t accepted_groups = 0;
  std::size_t rejected_groups = 0;
  std::size_t marked = 0;
  std::vector<std::string> violations;
};

/// Marks selected samples of accepted groups as clean candidates. Groups
/// with fewer than min_select selections, unknown ids or samples outside the
/// group are rejected and listed.
ImportReport import_filter_selections(const FilterBundleSet& bundles,
                                      std::span<const FilterSelection> selections,
                                      Manifest& manifest);

}  // namespace adc
