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

#include "adc/transition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adc/simd/kernels.hpp"

namespace adc {

TransitionEstimate TransitionEstimate::identity(std::size_t k) { return symmetric(k, 0.0); }

TransitionEstimate TransitionEstimate::symmetric(std::size_t k, double noise) {
  if (k < 2) throw RangeError("transition: need at least 2 classes");
  TransitionEstimate e;
  e.num_classes = k;
  e.matrix.assign(k * k, noise / static_cast<double>(k - 1));
  for (std::size_t i = 0; i < k; ++i) e.matrix[i * k + i] = 1.0 - noise;
  e.prior.assign(k, 1.0 / static_cast<double>(k));
  e.converged = true;
  return e;
}

std::optional<double> TransitionEstimate::clean_posterior(std::size_t j) const {
  double denom = 0.0;
  for (std::size_t i = 0; i < num_classes; ++i) denom += prior[i] * t(i, j);
  if (denom <= 0.0) return std::nullopt;
  return prior[j] * t(j, j) / denom;
}

void TransitionEstimate::validate() const {
  const std::size_t k = num_classes;
  if (k < 1 || matrix.size() != k * k || prior.size() != k)
    throw ValidationError("transition: shape mismatch");
  auto check_row = [](std::span<const double> row, const char* what) {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(what) + ": entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw ValidationError(std::string(what) + ": does not sum to 1");
  };
  for (std::size_t i = 0; i < k; ++i) check_row({matrix.data() + i * k, k}, "transition row");
  check_row(prior, "prior");
}

void project_to_simplex(std::span<double> v) {
  // Sort-based projection (Held, Wolfe & Crowder; Duchi et al.).
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(x - theta, 0.0);
    sum += x;
  }
  // Renormalise away rounding drift so rows sum to 1 to machine precision.
  if (sum > 0.0)
    for (double& x : v) x /= sum;
}

ConsensusStats consensus_stats(const EmbeddingMatrix& features, std::span<const ClassIndex> labels,
                               std::size_t num_classes, const ConsensusConfig& config) {
  const std::size_t n = features.n_rows();
  const std::size_t k = num_classes;
  if (labels.size() != n) throw ValidationError("consensus: label count differs from rows");
  if (n < 3) throw ValidationError("consensus: need at least 3 rows");
  std::size_t m = config.sample_size ? config.sample_size : std::min(n, 50 * k * k);
  m = std::clamp<std::size_t>(m, 3, n);

  ConsensusStats st;
  st.num_classes = k;
  st.first.assign(k, 0.0);
  st.second.assign(k * k, 0.0);
  st.third.assign(k * k * k, 0.0);

  const auto& kern = simd::active();
  Rng rng(derive_seed(config.seed, "consensus"));
  std::vector<std::size_t> pool(n);
  std::vector<float> packed, sims;
  for (std::size_t round = 0; round < std::max<std::size_t>(config.rounds, 1); ++round) {
    // Distinct rows within a round (partial Fisher-Yates).
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
      std::swap(pool[i], pool[j]);
    }
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));

    const std::size_t d = features.dim();
    packed.resize(m * d);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = features.unit_row(pool[i]);
      std::copy(row.begin(), row.end(), packed.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    sims.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
      kern.dot_rows(packed.data() + a * d, packed.data(), m, d, sims.data());
      std::size_t b1 = SIZE_MAX, b2 = SIZE_MAX;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == a) continue;
        if (b1 == SIZE_MAX || sims[j] > sims[b1]) {
          b2 = b1;
          b1 = j;
        } else if (b2 == SIZE_MAX || sims[j] > sims[b2]) {
          b2 = j;
        }
      }
      const auto la = static_cast<std::size_t>(labels[pool[a]]);
      const auto l1 = static_cast<std::size_t>(labels[pool[b1]]);
      const auto l2 = static_cast<std::size_t>(labels[pool[b2]]);
      st.first[la] += 1.0;
      st.second[la * k + l1] += 1.0;
      st.third[(la * k + l1) * k + l2] += 1.0;
      ++st.tuples;
    }
  }

  // Normalise, then symmetrise: under the model the tuple roles are
  // exchangeable, so averaging over permutations only removes noise.
  const double inv = 1.0 / static_cast<double>(st.tuples);
  for (double& v : st.first) v *= inv;
  std::vector<double> s2(k * k), s3(k * k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      s2[a * k + b] = 0.5 * (st.second[a * k + b] + st.second[b * k + a]) * inv;
  auto at3 = [&](std::size_t a, std::size_t b, std::size_t c) { return st.third[(a * k + b) * k + c]; };
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t c = 0; c < k; ++c)
        s3[(a * k + b) * k + c] = (at3(a, b, c) + at3(a, c, b) + at3(b, a, c) + at3(b, c, a) +
                                   at3(c, a, b) + at3(c, b, a)) /
                                  6.0 * inv;
  st.second = std::move(s2);
  st.third = std::move(s3);
  return st;
}

namespace {

struct Residuals {
  std::vector<double> r1, r2, r3;
  double loss = 0.0;
};

Residuals residuals(std::span<const double> T, std::span<const double> p, const ConsensusStats& st) {
  const std::size_t k = st.num_classes;
  Residuals r;
  r.r1.assign(k, 0.0);
  r.r2.assign(k * k, 0.0);
  r.r3.assign(k * k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double* Ti = T.data() + i * k;
    for (std::size_t a = 0; a < k; ++a) {
      const double pa = p[i] * Ti[a];
      r.r1[a] += pa;
      for (std::size_t b = 0; b < k; ++b) {
        const double pab = pa * Ti[b];
        r.r2[a * k + b] += pab;
        for (std::size_t c = 0; c < k; ++c) r.r3[(a * k + b) * k + c] += pab * Ti[c];
      }
    }
  }
  for (std::size_t a = 0; a < k; ++a) r.r1[a] -= st.first[a];
  for (std::size_t i = 0; i < k * k; ++i) r.r2[i] -= st.second[i];
  for (std::size_t i = 0; i < k * k * k; ++i) r.r3[i] -= st.third[i];
  for (double v : r.r1) r.loss += v * v;
  for (double v : r.r2) r.loss += v * v;
  for (double v : r.r3) r.loss += v * v;
  return r;
}

}  // namespace

double consensus_residual(const TransitionEstimate& est, const ConsensusStats& stats) {
  return residuals(est.matrix, est.prior, stats).loss;
}

TransitionEstimate fit_transition(const ConsensusStats& st, const ConsensusConfig& config) {
  const std::size_t k = st.num_classes;
  // Diagonally dominant start selects the label-aligned solution among the
  // permutation-equivalent ones.
  TransitionEstimate est = TransitionEstimate::symmetric(k, 0.1);
  est.prior = st.first;
  project_to_simplex(est.prior);
  est.tuples = st.tuples;
  est.converged = false;

  std::vector<double> T = est.matrix, p = est.prior;
  Residuals cur = residuals(T, p, st);
  std::vector<double> gT(k * k), gp(k), Tn(k * k), pn(k);

  std::size_t it = 0;
  for (; it < config.max_iters; ++it) {
    // Gradients of Σr1² + Σr2² + Σr3² with symmetric second/third moments.
    for (std::size_t i = 0; i < k; ++i) {
      const double* Ti = T.data() + i * k;
      double gpi = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        double s2 = 0.0, s3 = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
          s2 += cur.r2[j * k + b] * Ti[b];
          for (std::size_t c = 0; c < k; ++c) s3 += cur.r3[(j * k + b) * k + c] * Ti[b] * Ti[c];
        }
        gT[i * k + j] = 2.0 * p[i] * (cur.r1[j] + 2.0 * s2 + 3.0 * s3);
        // Σ_j Ti[j]·(r1_j + s2_j + s3_j) is the p-gradient (without the factor 2).
        gpi += Ti[j] * (cur.r1[j] + s2 + s3);
      }
      gp[i] = 2.0 * gpi;
    }

    double step = config.step;
    Residuals next;
    bool improved = false;
    while (step > 1e-14) {
      for (std::size_t i = 0; i < k * k; ++i) Tn[i] = T[i] - step * gT[i];
      for (std::size_t i = 0; i < k; ++i) project_to_simplex({Tn.data() + i * k, k});
      for (std::size_t i = 0; i < k; ++i) pn[i] = p[i] - step * gp[i];
      project_to_simplex(pn);
      next = residuals(Tn, pn, st);
      if (next.loss < cur.loss) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      est.converged = true;
      break;
    }
    const double decrease = cur.loss - next.loss;
    T.swap(Tn);
    p.swap(pn);
    cur = std::move(next);
    if (decrease <= config.tolerance * std::max(cur.loss + decrease, 1e-300)) {
      est.converged = true;
      ++it;
      break;
    }
  }
  est.matrix = std::move(T);
  est.prior = std::move(p);
  est.residual = cur.loss;
  est.iterations = it;
  return est;
}

TransitionEstimate estimate_transition(const EmbeddingMatrix& features,
                                       std::span<const ClassIndex> labels,
                                       std::size_t num_classes, const ConsensusConfig& config) {
  if (num_classes < 2) throw RangeError("estimate_transition: need K >= 2");
  if (labels.size() != features.n_rows())
    throw ValidationError("estimate_transition: label count differs from rows");
  std::vector<std::size_t> counts(num_classes, 0);
  for (ClassIndex l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
      throw RangeError("estimate_transition: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < num_classes; ++c)
    if (counts[c] == 0)
      throw ValidationError("estimate_transition: class " + std::to_string(c) + " has no samples");
  if (labels.size() < config.min_samples_per_class * num_classes)
    throw ValidationError("estimate_transition: need at least " +
                          std::to_string(config.min_samples_per_class * num_classes) +
                          " samples, got " + std::to_string(labels.size()));
  return fit_transition(consensus_stats(features, labels, num_classes, config), config);
}

}  // namespace adc
