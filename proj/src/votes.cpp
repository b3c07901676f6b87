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

#include "adc/votes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <unordered_map>

namespace adc {

std::string_view to_string(Vote v) {
  switch (v) {
    case Vote::kYes: return "yes";
    case Vote::kUnsure: return "unsure";
    case Vote::kNo: return "no";
  }
  return "no";
}

Vote parse_vote(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "yes" || t == "y") return Vote::kYes;
  if (t == "unsure" || t == "u") return Vote::kUnsure;
  if (t == "no" || t == "n") return Vote::kNo;
  throw FormatError("malformed vote value '" + std::string(s) + "'");
}

std::string_view to_string(AggregationPolicy p) {
  return p == AggregationPolicy::kMajority ? "majority" : "strict";
}

AggregationPolicy parse_policy(std::string_view s) {
  if (s == "majority") return AggregationPolicy::kMajority;
  if (s == "strict") return AggregationPolicy::kStrict;
  throw ValidationError("unknown aggregation policy '" + std::string(s) + "'");
}

std::string_view to_string(VotePattern p) {
  switch (p) {
    case VotePattern::kYYY: return "YYY";
    case VotePattern::kYYU: return "YYU";
    case VotePattern::kYYN: return "YYN";
    case VotePattern::kElse: return "else";
  }
  return "else";
}

namespace {

struct Tally {
  std::size_t yes = 0, unsure = 0, no = 0;
};

Tally tally(std::span<const Vote> votes) {
  Tally t;
  for (Vote v : votes) {
    if (v == Vote::kYes) ++t.yes;
    else if (v == Vote::kUnsure) ++t.unsure;
    else ++t.no;
  }
  return t;
}

}  // namespace

VotePattern canonical_pattern(std::span<const Vote> votes) {
  const Tally t = tally(votes);
  if (votes.empty()) return VotePattern::kElse;
  if (t.yes == votes.size()) return VotePattern::kYYY;
  if (t.yes < 2) return VotePattern::kElse;
  return t.no > 0 ? VotePattern::kYYN : VotePattern::kYYU;
}

bool is_clean(std::span<const Vote> votes, AggregationPolicy policy) {
  if (votes.empty()) return false;
  const Tally t = tally(votes);
  // a single-vote record is majority-clean on its one yes
  return policy == AggregationPolicy::kStrict ? t.yes == votes.size()
                                              : t.yes >= std::min<std::size_t>(2, votes.size());
}

double VoteDistribution::fraction(VotePattern p) const {
  return total ? static_cast<double>(counts[static_cast<std::size_t>(p)]) / static_cast<double>(total)
               : 0.0;
}

std::array<double, kPatternCount> VoteDistribution::fractions() const {
  std::array<double, kPatternCount> f{};
  for (std::size_t i = 0; i < kPatternCount; ++i) f[i] = fraction(static_cast<VotePattern>(i));
  return f;
}

double AggregationResult::clean_fraction() const {
  const std::size_t n = clean + noisy;
  return n ? static_cast<double>(clean) / static_cast<double>(n) : 0.0;
}

AggregationResult aggregate_votes(std::span<const VoteRecord> records, AggregationPolicy policy,
                                  std::size_t max_votes) {
  AggregationResult res;
  res.verdicts.reserve(records.size());
  for (const auto& r : records) {
    if (r.votes.empty() || r.votes.size() > max_votes)
      throw ValidationError("votes: " + r.sample_id + " has " + std::to_string(r.votes.size()) +
                            " votes (allowed 1.." + std::to_string(max_votes) + ")");
    if (!r.annotator_ids.empty() && r.annotator_ids.size() != r.votes.size())
      throw ValidationError("votes: " + r.sample_id + " annotator count differs from vote count");
    const VotePattern pattern = canonical_pattern(r.votes);
    const bool clean = is_clean(r.votes, policy);
    res.verdicts.push_back({r.sample_id, clean, pattern});
    ++res.distribution.counts[static_cast<std::size_t>(pattern)];
    ++res.distribution.total;
    (clean ? res.clean : res.noisy) += 1;
    for (std::size_t i = 0; i < r.annotator_ids.size(); ++i)
      ++res.annotator_counts[r.annotator_ids[i]][static_cast<std::size_t>(r.votes[i])];
  }
  return res;
}

NoiseInterval estimate_noise_interval(const std::array<double, kPatternCount>& f) {
  double sum = 0.0;
  for (double v : f) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("noise interval: fraction outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("noise interval: fractions sum to " + std::to_string(sum) + ", not 1");
  NoiseInterval out;
  out.lower = f[static_cast<std::size_t>(VotePattern::kElse)];
  out.ambiguity = f[static_cast<std::size_t>(VotePattern::kYYN)];
  out.upper = out.lower + out.ambiguity;
  return out;
}

NoiseInterval estimate_noise_interval(const VoteDistribution& d) {
  if (d.total == 0) throw ValidationError("noise interval: empty distribution");
  return estimate_noise_interval(d.fractions());
}

std::string serialize_votes(std::span<const VoteRecord> records) {
  std::string out;
  for (const auto& r : records) {
    if (r.sample_id.find_first_of(",;\n") != std::string::npos)
      throw ValidationError("votes: sample id contains a separator: " + r.sample_id);
    out += r.sample_id;
    for (Vote v : r.votes) {
      out.push_back(',');
      out += to_string(v);
    }
    if (!r.annotator_ids.empty()) {
      out.push_back(';');
      out += join(r.annotator_ids, ",");
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<VoteRecord> parse_votes(std::string_view text) {
  std::vector<VoteRecord> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    VoteRecord r;
    std::string votes_part = line, ann_part;
    if (auto semi = line.find(';'); semi != std::string::npos) {
      votes_part = line.substr(0, semi);
      ann_part = line.substr(semi + 1);
    }
    auto fields = split(votes_part, ',');
    if (fields.size() < 2)
      throw FormatError("votes line " + std::to_string(line_no) + ": need sample_id and votes");
    r.sample_id = fields[0];
    try {
      for (std::size_t i = 1; i < fields.size(); ++i) r.votes.push_back(parse_vote(fields[i]));
    } catch (const FormatError& e) {
      throw FormatError("votes line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ann_part.empty()) r.annotator_ids = split(ann_part, ',');
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<VoteRecord> load_votes(const std::filesystem::path& path) { return parse_votes(read_file(path)); }

void save_votes(std::span<const VoteRecord> records, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_votes(records));
}

// Bundles ------------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;
constexpr std::string_view kBundleKind = "adc-filter-bundles";

std::string default_instructions(std::size_t group_size, std::size_t min_select) {
  return "All " + std::to_string(group_size) +
         " images in this task share one machine-generated label. Select every image that truly "
         "matches the label; select at least " +
         std::to_string(min_select) + ".";
}

std::string group_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%06zu", index);
  return buf;
}

}  // namespace

FilterBundleSet export_filter_bundles(const Manifest& manifest, const FilterBundleOptions& opt,
                                      const TaxonomySpec* taxonomy) {
  if (opt.group_size == 0 || opt.tasks_per_bundle == 0)
    throw RangeError("export_filter_bundles: sizes must be positive");
  if (opt.min_select > opt.group_size)
    throw RangeError("export_filter_bundles: min_select exceeds group size");
  FilterBundleSet set;
  set.seed = opt.seed;
  set.group_size = opt.group_size;
  set.min_select = opt.min_select;
  set.tasks_per_bundle = opt.tasks_per_bundle;
  set.instructions = default_instructions(opt.group_size, opt.min_select);

  std::map<ClassIndex, std::vector<const SampleRecord*>> by_class;
  for (const auto& r : manifest.records()) {
    if (r.status != FetchStatus::kFetched) continue;
    if (opt.split && r.split != *opt.split) continue;
    by_class[r.webly_label].push_back(&r);
  }
  std::size_t next_group = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < opt.group_size) {
      set.warnings.push_back("class " + std::to_string(label) + " has " +
                             std::to_string(members.size()) + " samples (< " +
                             std::to_string(opt.group_size) + "), skipped");
      continue;
    }
    Rng rng(derive_seed(opt.seed, "filter-bundles:" + std::to_string(label)));
    rng.shuffle(members);
    const std::size_t groups = members.size() / opt.group_size;
    for (std::size_t g = 0; g < groups; ++g) {
      FilterGroup fg;
      fg.group_id = group_id_for(next_group);
      fg.hit = next_group / opt.tasks_per_bundle;
      fg.machine_label = label;
      if (taxonomy && label >= 0 && static_cast<std::size_t>(label) < taxonomy->classes.size())
        fg.class_name = taxonomy->classes[static_cast<std::size_t>(label)].name;
      fg.min_select = opt.min_select;
      for (std::size_t i = 0; i < opt.group_size; ++i) {
        const auto* rec = members[g * opt.group_size + i];
        fg.sample_ids.push_back(rec->sample_id);
        fg.uris.push_back(rec->uri);
      }
      set.groups.push_back(std::move(fg));
      ++next_group;
    }
  }
  return set;
}

std::string serialize_bundles(const FilterBundleSet& set) {
  ojson h;
  h["kind"] = kBundleKind;
  h["version"] = 1;
  h["seed"] = set.seed;
  h["group_size"] = set.group_size;
  h["min_select"] = set.min_select;
  h["tasks_per_bundle"] = set.tasks_per_bundle;
  h["groups"] = set.groups.size();
  h["instructions"] = set.instructions;
  std::string out = h.dump() + "\n";
  for (const auto& g : set.groups) {
    ojson gj;
    gj["group_id"] = g.group_id;
    gj["hit"] = g.hit;
    gj["machine_label"] = g.machine_label;
    gj["class_name"] = g.class_name;
    gj["min_select"] = g.min_select;
    gj["size"] = g.sample_ids.size();
    out += gj.dump() + "\n";
    for (std::size_t i = 0; i < g.sample_ids.size(); ++i) {
      ojson s;
      s["sample_id"] = g.sample_ids[i];
      s["uri"] = g.uris[i];
      out += s.dump() + "\n";
    }
  }
  return out;
}

FilterBundleSet parse_bundles(std::string_view text) {
  FilterBundleSet set;
  std::vector<std::string> lines;
  for (auto& l : split(text, '\n'))
    if (!trim(l).empty()) lines.push_back(std::move(l));
  if (lines.empty()) throw FormatError("bundles: empty file");
  try {
    const auto h = nlohmann::json::parse(lines[0]);
    if (h.value("kind", std::string{}) != kBundleKind) throw FormatError("bundles: missing header");
    set.seed = h.at("seed").get<std::uint64_t>();
    set.group_size = h.at("group_size").get<std::size_t>();
    set.min_select = h.at("min_select").get<std::size_t>();
    set.tasks_per_bundle = h.at("tasks_per_bundle").get<std::size_t>();
    set.instructions = h.at("instructions").get<std::string>();
    const auto n_groups = h.at("groups").get<std::size_t>();
    std::size_t pos = 1;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (pos >= lines.size()) throw FormatError("bundles: truncated file");
      const auto gj = nlohmann::json::parse(lines[pos++]);
      FilterGroup fg;
      fg.group_id = gj.at("group_id").get<std::string>();
      fg.hit = gj.at("hit").get<std::size_t>();
      fg.machine_label = gj.at("machine_label").get<ClassIndex>();
      fg.class_name = gj.at("class_name").get<std::string>();
      fg.min_select = gj.at("min_select").get<std::size_t>();
      const auto size = gj.at("size").get<std::size_t>();
      for (std::size_t i = 0; i < size; ++i) {
        if (pos >= lines.size()) throw FormatError("bundles: truncated group " + fg.group_id);
        const auto sj = nlohmann::json::parse(lines[pos++]);
        fg.sample_ids.push_back(sj.at("sample_id").get<std::string>());
        fg.uris.push_back(sj.at("uri").get<std::string>());
      }
      set.groups.push_back(std::move(fg));
    }
    if (pos != lines.size()) throw FormatError("bundles: trailing lines");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundles: ") + e.what());
  }
  return set;
}

std::vector<FilterSelection> parse_selections(std::string_view text) {
  std::vector<FilterSelection> out;
  for (const auto& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    FilterSelection s;
    s.group_id = trim(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string id = trim(fields[i]);
      if (!id.empty()) s.selected.push_back(std::move(id));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string serialize_selections(std::span<const FilterSelection> selections) {
  std::string out;
  for (const auto& s : selections) {
    out += s.group_id;
    for (const auto& id : s.selected) out += "," + id;
    out.push_back('\n');
  }
  return out;
}

ImportReport import_filter_selections(const FilterBundleSet& bundles,
                                      std::span<const FilterSelection> selections,
                                      Manifest& manifest) {
  std::unordered_map<std::string, const FilterGroup*> groups;
  for (const auto& g : bundles.groups) groups.emplace(g.group_id, &g);
  ImportReport rep;
  for (const auto& sel : selections) {
    auto it = groups.find(sel.group_id);
    if (it == groups.end()) {
      ++rep.rejected_groups;
      rep.violations.push_back(sel.group_id + ": unknown group id");
      continue;
    }
    const FilterGroup& g = *it->second;
    const std::set<std::string> members(g.sample_ids.begin(), g.sample_ids.end());
    const std::set<std::string> chosen(sel.selected.begin(), sel.selected.end());
    std::string problem;
    for (const auto& id : chosen) {
      if (!members.contains(id)) problem = "sample " + id + " is not in the group";
      else if (!manifest.find(id)) problem = "sample " + id + " is not in the manifest";
    }
    if (problem.empty() && chosen.size() < g.min_select)
      problem = std::to_string(chosen.size()) + " selections, need at least " + std::to_string(g.min_select);
    if (!problem.empty()) {
      ++rep.rejected_groups;
      rep.violations.push_back(sel.group_id + ": " + problem);
      continue;
    }
    ++rep.accepted_groups;
    for (const auto& id : chosen) {
      const auto idx = *manifest.index_of(id);
      SampleRecord r = manifest.records()[idx];
      if (!r.clean_candidate) ++rep.marked;
      r.clean_candidate = true;
      manifest.set(idx, std::move(r));
    }
  }
  return rep;
}

}  // namespace adc
