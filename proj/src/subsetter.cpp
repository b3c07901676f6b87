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

#include "adc/subsetter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace adc {

std::size_t ClassDistribution::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ClassDistribution longtail_counts(std::size_t n_max, std::size_t num_classes, double rho) {
  if (num_classes < 2) throw RangeError("longtail_counts: need at least 2 classes");
  if (!(rho >= 1.0) || !std::isfinite(rho)) throw RangeError("longtail_counts: rho must be >= 1");
  if (static_cast<double>(n_max) < rho) throw RangeError("longtail_counts: n_max must be >= rho");
  ClassDistribution d;
  d.rho = rho;
  d.n_max = n_max;
  d.counts.resize(num_classes);
  const double k1 = static_cast<double>(num_classes - 1);
  for (std::size_t i = 0; i < num_classes; ++i) {
    const double v = static_cast<double>(n_max) * std::pow(rho, -static_cast<double>(i) / k1);
    // guard exact products like 39297·1 against pow rounding just below
    d.counts[i] = static_cast<std::size_t>(std::floor(v * (1.0 + 1e-12)));
  }
  d.counts.front() = n_max;
  d.counts.back() = static_cast<std::size_t>(std::floor(static_cast<double>(n_max) / rho * (1.0 + 1e-12)));
  return d;
}

LongtailSubset build_longtail_subset(const Manifest& manifest, const ClassDistribution& dist,
                                     std::uint64_t seed) {
  std::map<ClassIndex, std::vector<std::size_t>> by_class;
  const auto& recs = manifest.records();
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (recs[i].status == FetchStatus::kFetched) by_class[recs[i].webly_label].push_back(i);
  if (by_class.size() != dist.counts.size())
    throw ValidationError("build_longtail_subset: distribution has " + std::to_string(dist.counts.size()) +
                          " classes, manifest has " + std::to_string(by_class.size()));

  LongtailSubset out;
  for (const auto& [c, _] : by_class) out.class_order.push_back(c);
  std::stable_sort(out.class_order.begin(), out.class_order.end(), [&](ClassIndex a, ClassIndex b) {
    return by_class[a].size() > by_class[b].size();
  });

  std::vector<char> keep(recs.size(), 0);
  for (std::size_t r = 0; r < out.class_order.size(); ++r) {
    const ClassIndex c = out.class_order[r];
    auto& members = by_class[c];
    if (members.size() < dist.counts[r])
      throw ValidationError("build_longtail_subset: class " + std::to_string(c) + " has " +
                            std::to_string(members.size()) + " samples, needs " +
                            std::to_string(dist.counts[r]));
    Rng rng(derive_seed(seed, "longtail:" + std::to_string(c)));
    rng.shuffle(members);
    for (std::size_t i = 0; i < dist.counts[r]; ++i) keep[members[i]] = 1;
  }
  out.manifest = Manifest(manifest.header());
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (keep[i]) out.manifest.upsert(recs[i]);
  return out;
}

CleanSubset build_clean_subset(const Manifest& manifest, std::span<const CurationReport> reports,
                               MergeMode mode) {
  CleanSubset out;
  out.manifest = Manifest(manifest.header());
  const auto fetched = manifest.fetched();
  if (reports.empty()) {
    for (const auto* r : fetched) out.manifest.upsert(*r);
    out.stats.samples = fetched.size();
    out.retained = fetched.size();
    out.retained_fraction = fetched.empty() ? 0.0 : 1.0;
    return out;
  }
  const MergeResult merged = merge_filters(reports, mode);
  if (merged.report.entries.size() != fetched.size())
    throw ValidationError("build_clean_subset: reports cover " + std::to_string(merged.report.entries.size()) +
                          " samples, manifest has " + std::to_string(fetched.size()) + " fetched");
  for (std::size_t i = 0; i < fetched.size(); ++i) {
    if (merged.report.entries[i].sample_id != fetched[i]->sample_id)
      throw ValidationError("build_clean_subset: report row " + std::to_string(i) + " is " +
                            merged.report.entries[i].sample_id + ", manifest has " + fetched[i]->sample_id);
    if (merged.report.entries[i].flag) ++out.removed;
    else out.manifest.upsert(*fetched[i]);
  }
  out.stats = merged.stats;
  out.retained = fetched.size() - out.removed;
  if (!fetched.empty()) {
    const double n = static_cast<double>(fetched.size());
    out.removed_fraction = static_cast<double>(out.removed) / n;
    out.retained_fraction = static_cast<double>(out.retained) / n;
  }
  if (out.retained == 0) out.warnings.push_back("every sample was flagged; the clean subset is empty");
  return out;
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const std::size_t> weights) {
  const std::size_t sum = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  std::vector<std::size_t> q(weights.size(), 0);
  if (total == 0) return q;
  if (total > sum) throw RangeError("apportion: " + std::to_string(total) + " exceeds " + std::to_string(sum));
  // exact integer arithmetic: total·w = q·sum + rem
  std::vector<std::pair<unsigned __int128, std::size_t>> rems;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(total) * weights[j];
    q[j] = static_cast<std::size_t>(prod / sum);
    assigned += q[j];
    rems.emplace_back(prod % sum, j);
  }
  std::stable_sort(rems.begin(), rems.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++q[rems[i].second];
  return q;
}

std::vector<Split> split_labels(std::span<const ClassIndex> labels, const SplitOptions& opt) {
  const std::size_t n = labels.size();
  if (opt.eval_size + opt.test_size > n)
    throw RangeError("split: eval " + std::to_string(opt.eval_size) + " + test " +
                     std::to_string(opt.test_size) + " exceeds " + std::to_string(n) + " samples");
  std::vector<Split> out(n, Split::kTrain);

  std::map<ClassIndex, std::vector<std::size_t>> groups;
  if (opt.stratify) {
    for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);
  } else {
    auto& all = groups[0];
    all.resize(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
  }
  std::vector<std::vector<std::size_t>*> order;
  std::vector<std::size_t> sizes;
  for (auto& [c, members] : groups) {
    Rng rng(derive_seed(opt.seed, "split:" + std::to_string(c)));
    rng.shuffle(members);
    order.push_back(&members);
    sizes.push_back(members.size());
  }
  const auto q_eval = apportion(opt.eval_size, sizes);
  for (std::size_t g = 0; g < sizes.size(); ++g) sizes[g] -= q_eval[g];
  const auto q_test = apportion(opt.test_size, sizes);
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& m = *order[g];
    for (std::size_t i = 0; i < q_eval[g]; ++i) out[m[i]] = Split::kEval;
    for (std::size_t i = 0; i < q_test[g]; ++i) out[m[q_eval[g] + i]] = Split::kTest;
  }

  if (opt.tiny) {
    std::map<ClassIndex, std::vector<std::size_t>> train;
    for (std::size_t i = 0; i < n; ++i)
      if (out[i] == Split::kTrain) train[opt.stratify ? labels[i] : 0].push_back(i);
    std::size_t n_train = 0;
    for (const auto& [_, m] : train) n_train += m.size();
    if (*opt.tiny > n_train)
      throw RangeError("split: tiny " + std::to_string(*opt.tiny) + " exceeds " + std::to_string(n_train) +
                       " train samples");
    std::vector<std::size_t> tsizes;
    for (const auto& [_, m] : train) tsizes.push_back(m.size());
    const auto q = apportion(*opt.tiny, tsizes);
    std::size_t g = 0;
    for (auto& [c, m] : train) {
      Rng rng(derive_seed(opt.seed, "tiny:" + std::to_string(c)));
      rng.shuffle(m);
      for (std::size_t i = q[g]; i < m.size(); ++i) out[m[i]] = Split::kNone;
      ++g;
    }
  }
  return out;
}

SplitCounts count_splits(std::span<const Split> splits) {
  SplitCounts c;
  for (Split s : splits) {
    switch (s) {
      case Split::kTrain: ++c.train; break;
      case Split::kEval: ++c.eval; break;
      case Split::kTest: ++c.test; break;
      case Split::kNone: ++c.none; break;
    }
  }
  return c;
}

Manifest split_dataset(const Manifest& manifest, const SplitOptions& opt) {
  std::vector<std::size_t> rows;
  std::vector<ClassIndex> labels;
  const auto& recs = manifest.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].status != FetchStatus::kFetched) continue;
    rows.push_back(i);
    labels.push_back(recs[i].webly_label);
  }
  const auto splits = split_labels(labels, opt);
  Manifest out = manifest;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].split == Split::kNone) continue;
    SampleRecord r = recs[i];
    r.split = Split::kNone;
    out.set(i, std::move(r));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    SampleRecord r = out.records()[rows[k]];
    r.split = splits[k];
    out.set(rows[k], std::move(r));
  }
  return out;
}

}  // namespace adc
