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

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "adc/common.hpp"
#include "adc/embedstore.hpp"
#include "adc/manifest.hpp"

namespace adc::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "t") {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("adc-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct Clusters {
  std::vector<float> data;  // n × dim
  std::vector<ClassIndex> truth;
  std::size_t n = 0, dim = 0;

  EmbeddingMatrix matrix() const { return EmbeddingMatrix(n, dim, data); }
};

/// k Gaussian blobs with centres sep·e_c (c < dim), σ = 1, classes assigned
/// round-robin so every class has n/k (±1) members.
inline Clusters make_clusters(std::size_t n, std::size_t k, std::size_t dim, double sep, std::uint64_t seed) {
  Clusters c;
  c.n = n;
  c.dim = dim;
  c.data.resize(n * dim);
  c.truth.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = static_cast<ClassIndex>(i % k);
    c.truth[i] = cls;
    for (std::size_t d = 0; d < dim; ++d) {
      double v = rng.normal();
      if (d == static_cast<std::size_t>(cls)) v += sep;
      c.data[i * dim + d] = static_cast<float>(v);
    }
  }
  return c;
}

/// Symmetric noise with exact counts: in every true class, round(noise·N_i)
/// samples are relabelled, split evenly over the other classes.
inline std::vector<ClassIndex> flip_exact(const std::vector<ClassIndex>& truth, std::size_t k, double noise,
                                          std::uint64_t seed) {
  std::vector<ClassIndex> noisy = truth;
  Rng rng(seed);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] == static_cast<ClassIndex>(c)) members.push_back(i);
    rng.shuffle(members);
    const auto flips = static_cast<std::size_t>(std::llround(noise * static_cast<double>(members.size())));
    for (std::size_t f = 0; f < flips; ++f) {
      const std::size_t offset = 1 + f % (k - 1);
      noisy[members[f]] = static_cast<ClassIndex>((c + offset) % k);
    }
  }
  return noisy;
}

/// Transition matrix realised by a (truth, noisy) pair, row-major.
inline std::vector<double> realised_transition(const std::vector<ClassIndex>& truth,
                                               const std::vector<ClassIndex>& noisy, std::size_t k) {
  std::vector<double> t(k * k, 0.0);
  std::vector<double> rows(k, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t[static_cast<std::size_t>(truth[i]) * k + static_cast<std::size_t>(noisy[i])] += 1.0;
    rows[static_cast<std::size_t>(truth[i])] += 1.0;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) t[i * k + j] /= rows[i];
  return t;
}

inline std::vector<double> symmetric_transition(std::size_t k, double noise) {
  std::vector<double> t(k * k, noise / static_cast<double>(k - 1));
  for (std::size_t i = 0; i < k; ++i) t[i * k + i] = 1.0 - noise;
  return t;
}

inline double max_row_l1(const std::vector<double>& a, const std::vector<double>& b, std::size_t k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::abs(a[i * k + j] - b[i * k + j]);
    worst = std::max(worst, s);
  }
  return worst;
}

inline std::vector<std::string> index_ids(std::size_t n, std::string_view prefix = "s") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::string(prefix) + std::to_string(i));
  return ids;
}

/// Random probability rows (Dirichlet(1)-like via normalised exponentials).
inline DenseMatrix random_probs(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix m{n, k, std::vector<float>(n * k), {}};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    std::vector<double> row(k);
    for (auto& v : row) {
      v = -std::log(1.0 - rng.uniform());
      s += v;
    }
    for (std::size_t j = 0; j < k; ++j) m.data[i * k + j] = static_cast<float>(row[j] / s);
  }
  return m;
}

/// Fetched records "r<i>" labelled `labels[i]`, each with its own fake hash.
inline Manifest labelled_manifest(const std::vector<ClassIndex>& labels, std::uint64_t seed = 0) {
  Manifest m({"test", seed});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    SampleRecord r;
    r.sample_id = "r" + std::to_string(i);
    r.key = SubclassKey{labels[i], {0}};
    r.webly_label = labels[i];
    r.query = "q";
    r.uri = "mock://q/" + std::to_string(i);
    char hash[65];
    std::snprintf(hash, sizeof hash, "%064zx", i);
    r.content_hash = hash;
    r.byte_size = 1;
    r.status = FetchStatus::kFetched;
    m.upsert(std::move(r));
  }
  return m;
}

}  // namespace adc::test
