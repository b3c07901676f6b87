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

#include "adc/curator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace adc {
namespace {

std::size_t infer_classes(std::span<const ClassIndex> labels) {
  ClassIndex mx = -1;
  for (ClassIndex l : labels) {
    if (l < 0) throw RangeError("negative class label");
    mx = std::max(mx, l);
  }
  return static_cast<std::size_t>(mx + 1);
}

void check_aligned(std::size_t rows, std::span<const ClassIndex> labels, const char* who) {
  if (rows != labels.size())
    throw ValidationError(std::string(who) + ": " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(rows) + " rows");
}

CurationReport make_report(std::string method, std::span<const std::string> ids) {
  CurationReport r;
  r.method = std::move(method);
  r.entries.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) r.entries[i].sample_id = ids[i];
  return r;
}

void check_label_range(std::span<const ClassIndex> labels, std::size_t k, const char* who) {
  for (ClassIndex l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= k)
      throw RangeError(std::string(who) + ": label " + std::to_string(l) + " outside [0, " +
                       std::to_string(k) + ")");
}

}  // namespace

std::size_t CurationReport::flagged_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.flag; }));
}

double CurationReport::flagged_fraction() const {
  return entries.empty() ? 0.0
                         : static_cast<double>(flagged_count()) / static_cast<double>(entries.size());
}

std::vector<bool> CurationReport::flags() const {
  std::vector<bool> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) out[i] = entries[i].flag;
  return out;
}

void summarize(CurationReport& report, std::span<const ClassIndex> labels, std::size_t num_classes) {
  check_aligned(report.entries.size(), labels, "summarize");
  std::vector<std::size_t> total(num_classes, 0), flagged(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= num_classes) throw RangeError("summarize: label out of range");
    ++total[c];
    flagged[c] += report.entries[i].flag ? 1 : 0;
  }
  report.class_flagged_fraction.assign(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (total[c]) report.class_flagged_fraction[c] = static_cast<double>(flagged[c]) / total[c];
}

std::vector<std::string> row_ids_or_index(const DenseMatrix& m) {
  if (!m.row_ids.empty()) return m.row_ids;
  std::vector<std::string> ids(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) ids[i] = std::to_string(i);
  return ids;
}

// SimiFeat-rank ---------------------------------------------------------

CurationReport simifeat_detect(const std::vector<NeighborList>& neighbors,
                               std::span<const std::string> ids, std::span<const ClassIndex> labels,
                               const TransitionEstimate& t_est) {
  t_est.validate();
  const std::size_t n = labels.size();
  const std::size_t k_classes = t_est.num_classes;
  check_aligned(neighbors.size(), labels, "simifeat_detect");
  check_label_range(labels, k_classes, "simifeat_detect");
  CurationReport report = make_report("simifeat", ids);

  for (std::size_t i = 0; i < n; ++i) {
    double agree = 0.0, total = 0.0;
    std::size_t agree_count = 0;
    for (const auto& nb : neighbors[i]) {
      const double w = 0.5 * (1.0 + static_cast<double>(nb.similarity));
      total += w;
      if (labels[nb.index] == labels[i]) {
        agree += w;
        ++agree_count;
      }
    }
    report.entries[i].score = total > 0.0 ? agree / total
                                          : static_cast<double>(agree_count) /
                                                static_cast<double>(std::max<std::size_t>(neighbors[i].size(), 1));
  }

  std::vector<std::vector<std::size_t>> by_class(k_classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  for (std::size_t j = 0; j < k_classes; ++j) {
    auto& members = by_class[j];
    if (members.empty()) continue;
    const auto posterior = t_est.clean_posterior(j);
    if (!posterior) {
      report.warnings.push_back("class " + std::to_string(j) +
                                ": degenerate posterior, using global threshold 0.5");
      for (std::size_t i : members) report.entries[i].flag = report.entries[i].score < 0.5;
      continue;
    }
    const double expected = static_cast<double>(members.size()) * (1.0 - *posterior);
    const auto m_j = std::min(members.size(), static_cast<std::size_t>(std::llround(std::max(expected, 0.0))));
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return report.entries[a].score < report.entries[b].score;
    });
    for (std::size_t r = 0; r < m_j; ++r) report.entries[members[r]].flag = true;
  }
  summarize(report, labels, k_classes);
  return report;
}

CurationReport simifeat_detect(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               const TransitionEstimate& t_est, std::size_t k) {
  check_aligned(features.n_rows(), labels, "simifeat_detect");
  return simifeat_detect(knn_all(features, k), features.row_ids(), labels, t_est);
}

// k-NN vote --------------------------------------------------------------

CurationReport knn_vote_detect(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               std::size_t num_classes, std::size_t k) {
  check_aligned(features.n_rows(), labels, "knn_vote_detect");
  if (num_classes == 0) num_classes = infer_classes(labels);
  check_label_range(labels, num_classes, "knn_vote_detect");
  const auto neighbors = knn_all(features, k);
  CurationReport report = make_report("knn", features.row_ids());
  std::vector<std::size_t> counts(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& nb : neighbors[i]) ++counts[static_cast<std::size_t>(labels[nb.index])];
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    const std::size_t differ = k - counts[static_cast<std::size_t>(labels[i])];
    report.entries[i].score = static_cast<double>(top) / static_cast<double>(k);
    report.entries[i].flag = 2 * differ > k;
  }
  summarize(report, labels, num_classes);
  return report;
}

// Probability-based detectors ----------------------------------------------

CurationReport confident_learning_detect(const DenseMatrix& probs, std::span<const ClassIndex> labels) {
  check_aligned(probs.rows, labels, "confident_learning_detect");
  const std::size_t k = probs.cols;
  check_label_range(labels, k, "confident_learning_detect");
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t n = 0; n < probs.rows; ++n) {
    const auto j = static_cast<std::size_t>(labels[n]);
    sum[j] += probs.at(n, j);
    ++count[j];
  }
  std::vector<double> threshold(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] == 0)
      throw ValidationError("confident_learning_detect: class " + std::to_string(j) + " has no members");
    threshold[j] = sum[j] / static_cast<double>(count[j]);
  }

  const auto ids = row_ids_or_index(probs);
  CurationReport report = make_report("cl", ids);
  for (std::size_t n = 0; n < probs.rows; ++n) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < k; ++j) {
      if (probs.at(n, j) < threshold[j]) continue;
      if (!best || probs.at(n, j) > probs.at(n, *best)) best = j;
    }
    const auto given = static_cast<std::size_t>(labels[n]);
    report.entries[n].score = probs.at(n, given);
    report.entries[n].flag = best.has_value() && *best != given;
    if (report.entries[n].flag) report.entries[n].suggested_label = static_cast<ClassIndex>(*best);
  }
  summarize(report, labels, k);
  return report;
}

CurationReport cores_score_detect(const DenseMatrix& probs, std::span<const ClassIndex> labels,
                                  CoresSign sign) {
  check_aligned(probs.rows, labels, "cores_score_detect");
  const std::size_t k = probs.cols;
  check_label_range(labels, k, "cores_score_detect");
  constexpr double kFloor = 1e-12;
  const auto ids = row_ids_or_index(probs);
  CurationReport report = make_report("cores", ids);
  std::size_t clipped = 0;
  auto nll = [&](double p) {
    if (p < kFloor) {
      ++clipped;
      p = kFloor;
    }
    return -std::log(p);
  };
  for (std::size_t n = 0; n < probs.rows; ++n) {
    double mean = 0.0;
    for (std::size_t j = 0; j < k; ++j) mean += nll(probs.at(n, j));
    mean /= static_cast<double>(k);
    const double score = nll(probs.at(n, static_cast<std::size_t>(labels[n]))) - mean;
    report.entries[n].score = score;
    report.entries[n].flag = sign == CoresSign::kFlagAbove ? score > 0.0 : score < 0.0;
  }
  if (clipped)
    report.warnings.push_back(std::to_string(clipped) + " probabilities clipped at 1e-12");
  summarize(report, labels, k);
  return report;
}

CurationReport confidence_percentile_filter(const DenseMatrix& probs,
                                            std::span<const ClassIndex> labels, double x_percent) {
  check_aligned(probs.rows, labels, "confidence_percentile_filter");
  if (!(x_percent > 0.0 && x_percent < 100.0))
    throw RangeError("confidence_percentile_filter: x must lie in (0, 100)");
  check_label_range(labels, probs.cols, "confidence_percentile_filter");
  const std::size_t n = probs.rows;
  const auto ids = row_ids_or_index(probs);
  CurationReport report = make_report("conf", ids);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i)
    report.entries[i].score = probs.at(i, static_cast<std::size_t>(labels[i]));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.entries[a].score < report.entries[b].score;
  });
  const auto cut = static_cast<std::size_t>(std::floor(x_percent * static_cast<double>(n) / 100.0));
  for (std::size_t r = 0; r < cut; ++r) report.entries[order[r]].flag = true;
  summarize(report, labels, probs.cols);
  return report;
}

// Relabeling -------------------------------------------------------------

CurationReport knn_relabel(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                           const CurationReport& report, std::size_t k) {
  check_aligned(features.n_rows(), labels, "knn_relabel");
  if (report.entries.size() != labels.size())
    throw ValidationError("knn_relabel: report is not aligned to the features");
  const std::size_t k_classes = infer_classes(labels);
  CurationReport out = report;
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    if (out.entries[i].flag) flagged.push_back(i);
  if (flagged.empty()) return out;

  const auto neighbors = knn_query(features, flagged, k);
  std::size_t unresolved = 0;
  std::vector<std::size_t> votes(k_classes);
  std::vector<double> weight(k_classes);
  for (std::size_t f = 0; f < flagged.size(); ++f) {
    std::fill(votes.begin(), votes.end(), 0);
    std::fill(weight.begin(), weight.end(), 0.0);
    bool any = false;
    for (const auto& nb : neighbors[f]) {
      if (report.entries[nb.index].flag) continue;
      const auto c = static_cast<std::size_t>(labels[nb.index]);
      ++votes[c];
      weight[c] += nb.similarity;
      any = true;
    }
    auto& entry = out.entries[flagged[f]];
    if (!any) {
      entry.suggested_label.reset();
      ++unresolved;
      continue;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k_classes; ++c) {
      if (votes[c] > votes[best] || (votes[c] == votes[best] && weight[c] > weight[best])) best = c;
    }
    entry.suggested_label = static_cast<ClassIndex>(best);
  }
  if (unresolved) out.warnings.push_back(std::to_string(unresolved) + " flagged samples unresolved");
  return out;
}

// Merging ----------------------------------------------------------------

std::string_view to_string(MergeMode mode) {
  return mode == MergeMode::kUnion ? "union" : "intersection";
}

MergeMode parse_merge_mode(std::string_view s) {
  if (s == "union") return MergeMode::kUnion;
  if (s == "intersection") return MergeMode::kIntersection;
  throw ValidationError("unknown merge mode '" + std::string(s) + "'");
}

MergeResult merge_filters(std::span<const CurationReport> reports, MergeMode mode) {
  if (reports.empty()) throw ValidationError("merge_filters: no reports");
  const std::size_t n = reports.front().entries.size();
  for (const auto& r : reports) {
    if (r.entries.size() != n) throw ValidationError("merge_filters: reports differ in length");
    for (std::size_t i = 0; i < n; ++i)
      if (r.entries[i].sample_id != reports.front().entries[i].sample_id)
        throw ValidationError("merge_filters: misaligned sample " + r.entries[i].sample_id);
  }

  MergeResult res;
  auto& st = res.stats;
  st.samples = n;
  std::vector<std::string> names;
  for (const auto& r : reports) {
    names.push_back(r.method);
    st.methods.push_back(r.method);
    st.method_counts.push_back(r.flagged_count());
  }
  res.report.method = std::string(to_string(mode)) + "(" + join(names, ",") + ")";
  res.report.seed = reports.front().seed;
  res.report.entries.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t hits = 0;
    std::optional<ClassIndex> suggestion;
    for (const auto& r : reports) {
      if (!r.entries[i].flag) continue;
      ++hits;
      if (!suggestion) suggestion = r.entries[i].suggested_label;
    }
    auto& e = res.report.entries[i];
    e.sample_id = reports.front().entries[i].sample_id;
    e.score = static_cast<double>(hits) / static_cast<double>(reports.size());
    e.flag = mode == MergeMode::kUnion ? hits > 0 : hits == reports.size();
    if (e.flag) e.suggested_label = suggestion;
    if (hits == reports.size()) ++st.overlap_count;
    if (e.flag) ++st.combined_count;
  }
  const double dn = n ? static_cast<double>(n) : 1.0;
  for (std::size_t c : st.method_counts) st.method_fractions.push_back(static_cast<double>(c) / dn);
  st.overlap_fraction = static_cast<double>(st.overlap_count) / dn;
  st.combined_fraction = static_cast<double>(st.combined_count) / dn;

  // Inclusion-exclusion holds exactly on counts for two inputs.
  if (reports.size() == 2 && mode == MergeMode::kUnion &&
      st.combined_count != st.method_counts[0] + st.method_counts[1] - st.overlap_count) {
    throw NumericError("merge_filters: inclusion-exclusion identity violated");
  }
  return res;
}

}  // namespace adc
