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

#include "adc/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <cmath>
#include <sstream>

namespace adc {

DetectionMetrics detection_prf(std::span<const bool> flags, std::span<const bool> corrupted) {
  if (flags.size() != corrupted.size())
    throw ValidationError("detection_prf: " + std::to_string(flags.size()) + " flags vs " +
                          std::to_string(corrupted.size()) + " truth values");
  DetectionMetrics m;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    m.flagged += flags[i];
    m.corrupted += corrupted[i];
    m.hits += flags[i] && corrupted[i];
  }
  if (m.flagged) m.precision = static_cast<double>(m.hits) / static_cast<double>(m.flagged);
  if (m.corrupted) m.recall = static_cast<double>(m.hits) / static_cast<double>(m.corrupted);
  if (m.precision && m.recall) {
    const double p = *m.precision, r = *m.recall;
    m.f1 = (p == 0.0 || r == 0.0) ? 0.0 : 2.0 / (1.0 / p + 1.0 / r);
  }
  return m;
}

DetectionMetrics detection_prf(const std::vector<bool>& flags, const std::vector<bool>& corrupted) {
  // vector<bool> is not contiguous
  std::unique_ptr<bool[]> f(new bool[flags.size()]), c(new bool[corrupted.size()]);
  std::copy(flags.begin(), flags.end(), f.get());
  std::copy(corrupted.begin(), corrupted.end(), c.get());
  return detection_prf(std::span<const bool>(f.get(), flags.size()),
                       std::span<const bool>(c.get(), corrupted.size()));
}

std::vector<double> ClassAccuracy::defined() const {
  std::vector<double> out;
  for (const auto& a : per_class)
    if (a) out.push_back(*a);
  return out;
}

ClassAccuracy class_accuracies(std::span<const ClassIndex> predictions, std::span<const ClassIndex> truth,
                               std::size_t num_classes) {
  if (predictions.size() != truth.size())
    throw ValidationError("class_accuracies: prediction and truth lengths differ");
  if (num_classes == 0) throw RangeError("class_accuracies: no classes");
  std::vector<std::size_t> correct(num_classes, 0);
  ClassAccuracy out;
  out.support.assign(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const ClassIndex y = truth[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
      throw RangeError("class_accuracies: label " + std::to_string(y) + " out of range");
    ++out.support[static_cast<std::size_t>(y)];
    correct[static_cast<std::size_t>(y)] += predictions[i] == y;
  }
  double sum = 0.0;
  std::size_t defined = 0;
  out.per_class.resize(num_classes);
  for (std::size_t j = 0; j < num_classes; ++j) {
    if (!out.support[j]) {
      out.empty_classes.push_back(static_cast<ClassIndex>(j));
      continue;
    }
    const double a = static_cast<double>(correct[j]) / static_cast<double>(out.support[j]);
    out.per_class[j] = a;
    sum += a;
    ++defined;
    out.worst = out.worst ? std::min(*out.worst, a) : a;
  }
  if (defined) out.mean = sum / static_cast<double>(defined);
  return out;
}

double kl_to_uniform(std::span<const double> g) {
  const double log_k = std::log(static_cast<double>(g.size()));
  double kl = 0.0;
  for (double gi : g)
    if (gi > 0.0) kl += gi * (std::log(gi) + log_k);
  return std::max(kl, 0.0);
}

namespace {

// Gibbs weights at temperature tau, with KL to uniform computed in log space.
struct Gibbs {
  std::vector<double> g;
  double kl = 0.0;
};

Gibbs gibbs(std::span<const double> acc, double lo, double tau) {
  const std::size_t k = acc.size();
  std::vector<double> logit(k);
  for (std::size_t i = 0; i < k; ++i) logit[i] = -(acc[i] - lo) / tau;
  // max logit is 0 (the minimum accuracy)
  double z = 0.0;
  for (double l : logit) z += std::exp(l);
  const double log_z = std::log(z);
  const double log_k = std::log(static_cast<double>(k));
  Gibbs out;
  out.g.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double lg = logit[i] - log_z;
    out.g[i] = std::exp(lg);
    if (out.g[i] > 0.0) out.kl += out.g[i] * (lg + log_k);
  }
  out.kl = std::max(out.kl, 0.0);
  return out;
}

double weighted(std::span<const double> acc, std::span<const double> g) {
  double v = 0.0;
  for (std::size_t i = 0; i < acc.size(); ++i) v += g[i] * acc[i];
  return v;
}

}  // namespace

DeltaWorstResult delta_worst_accuracy(std::span<const double> acc, double delta) {
  const std::size_t k = acc.size();
  if (k < 2) throw ValidationError("delta_worst_accuracy: need at least 2 classes");
  for (double a : acc)
    if (!(a >= 0.0 && a <= 1.0)) throw RangeError("delta_worst_accuracy: accuracy outside [0,1]");
  if (std::isnan(delta) || delta < 0.0) throw RangeError("delta_worst_accuracy: delta must be >= 0");

  DeltaWorstResult r;
  const double lo = *std::min_element(acc.begin(), acc.end());
  const double hi = *std::max_element(acc.begin(), acc.end());
  const double log_k = std::log(static_cast<double>(k));

  if (lo == hi) {
    r.value = lo;
    r.weights.assign(k, 1.0 / static_cast<double>(k));
    return r;
  }
  if (delta == 0.0) {
    r.weights.assign(k, 1.0 / static_cast<double>(k));
    double s = 0.0;
    for (double a : acc) s += a;
    r.value = s / static_cast<double>(k);
    return r;
  }
  if (delta >= log_k) {
    r.weights.assign(k, 0.0);
    r.weights[static_cast<std::size_t>(std::min_element(acc.begin(), acc.end()) - acc.begin())] = 1.0;
    r.value = lo;
    r.divergence = log_k;
    return r;
  }
  const auto ties = static_cast<std::size_t>(std::count(acc.begin(), acc.end(), lo));
  const double saturation = std::log(static_cast<double>(k) / static_cast<double>(ties));
  if (delta >= saturation) {
    // uniform over the minima already reaches the worst value inside the ball
    r.weights.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      if (acc[i] == lo) r.weights[i] = 1.0 / static_cast<double>(ties);
    r.value = lo;
    r.divergence = kl_to_uniform(r.weights);
    return r;
  }

  // KL(g_tau || u) decreases in tau; bisect on log tau.
  double s_lo = std::log(1e-8), s_hi = std::log(1e8);
  const double kl_lo = gibbs(acc, lo, std::exp(s_lo)).kl;
  const double kl_hi = gibbs(acc, lo, std::exp(s_hi)).kl;
  if (!(kl_lo >= delta && kl_hi <= delta)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "delta_worst_accuracy: tau bracket [1e-8, 1e8] gives KL [" << kl_hi << ", " << kl_lo
        << "], target " << delta;
    throw NumericError(msg.str());
  }
  Gibbs best = gibbs(acc, lo, std::exp(0.5 * (s_lo + s_hi)));
  double s_mid = 0.5 * (s_lo + s_hi);
  for (int it = 0; it < 500; ++it) {
    s_mid = 0.5 * (s_lo + s_hi);
    best = gibbs(acc, lo, std::exp(s_mid));
    if (std::abs(best.kl - delta) <= 1e-10) break;
    if (best.kl > delta) s_lo = s_mid;
    else s_hi = s_mid;
    if (s_hi - s_lo < 1e-15) break;
  }
  r.weights = std::move(best.g);
  r.divergence = best.kl;
  r.temperature = std::exp(s_mid);
  r.value = weighted(acc, r.weights);
  return r;
}

std::vector<ClassIndex> argmax_rows(const DenseMatrix& scores) {
  std::vector<ClassIndex> out(scores.rows);
  for (std::size_t n = 0; n < scores.rows; ++n) {
    const auto row = scores.row(n);
    out[n] = static_cast<ClassIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<ClassIndex> posthoc_logit_adjust(const DenseMatrix& logits, std::span<const double> prior,
                                             double tau) {
  if (prior.size() != logits.cols)
    throw ValidationError("posthoc_logit_adjust: prior has " + std::to_string(prior.size()) +
                          " entries for " + std::to_string(logits.cols) + " classes");
  if (logits.cols == 0) throw ValidationError("posthoc_logit_adjust: no classes");
  double sum = 0.0;
  for (double p : prior) {
    if (!(p > 0.0)) throw RangeError("posthoc_logit_adjust: prior entries must be > 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("posthoc_logit_adjust: prior does not sum to 1");
  std::vector<double> offset(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) offset[j] = tau * std::log(prior[j]);
  std::vector<ClassIndex> out(logits.rows);
  for (std::size_t n = 0; n < logits.rows; ++n) {
    const auto row = logits.row(n);
    std::size_t best = 0;
    double best_v = static_cast<double>(row[0]) - offset[0];
    for (std::size_t j = 1; j < row.size(); ++j) {
      const double v = static_cast<double>(row[j]) - offset[j];
      if (v > best_v) {
        best_v = v;
        best = j;
      }
    }
    out[n] = static_cast<ClassIndex>(best);
  }
  return out;
}

namespace {

long parse_long(const std::string& s, std::size_t line_no) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw FormatError("line " + std::to_string(line_no) + ": expected an integer, got '" + s + "'");
  return v;
}

}  // namespace

std::unordered_map<std::string, bool> parse_truth(std::string_view text) {
  std::unordered_map<std::string, bool> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto f = split(line, ',');
    for (auto& x : f) x = trim(x);
    bool corrupted = false;
    if (f.size() == 2) {
      const long v = parse_long(f[1], line_no);
      if (v != 0 && v != 1) throw FormatError("truth line " + std::to_string(line_no) + ": flag must be 0 or 1");
      corrupted = v == 1;
    } else if (f.size() == 3) {
      corrupted = parse_long(f[1], line_no) != parse_long(f[2], line_no);
    } else {
      throw FormatError("truth line " + std::to_string(line_no) + ": expected 2 or 3 fields");
    }
    if (!out.emplace(f[0], corrupted).second)
      throw FormatError("truth line " + std::to_string(line_no) + ": duplicate sample id " + f[0]);
  }
  return out;
}

std::unordered_map<std::string, bool> load_truth(const std::filesystem::path& path) {
  return parse_truth(read_file(path));
}

std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    double v = 0.0;
    const auto* end = line.data() + line.size();
    auto [p, ec] = std::from_chars(line.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v))
      throw FormatError("values line " + std::to_string(line_no) + ": not a number: '" + line + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> load_values(const std::filesystem::path& path) { return parse_values(read_file(path)); }

double parse_delta(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "inf" || t == "infinity") return kDeltaInfinity;
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || !(v >= 0.0))
    throw RangeError("delta must be a non-negative number or 'inf', got '" + std::string(s) + "'");
  return v;
}

}  // namespace adc
