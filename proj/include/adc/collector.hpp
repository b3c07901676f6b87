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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "adc/content.hpp"
#include "adc/manifest.hpp"
#include "adc/taxonomy.hpp"

namespace adc {

inline constexpr std::size_t kDefaultPerQueryLimit = 100;
inline constexpr std::size_t kDefaultWorkers = 30;

struct BackendInfo {
  std::string name;
  std::size_t max_results_per_query = kDefaultPerQueryLimit;
  double requests_per_second = 0.0;  // 0 = unlimited
};

enum class DownloadStatus { kOk, kBroken };

struct Download {
  DownloadStatus status = DownloadStatus::kBroken;
  std::vector<std::uint8_t> bytes;
};

/// Search + download contract. search() returns at most `limit` URIs,
/// best-relevance-first. Both calls must be thread-safe; retryable failures
/// throw TransportError.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual BackendInfo info() const = 0;
  virtual std::vector<std::string> search(std::string_view query, std::size_t limit) = 0;
  /// Default handles file:// and http(s):// URIs.
  virtual Download fetch(std::string_view uri);
};

struct FetchTask {
  SubclassKey key;
  std::string query;
  std::size_t limit = kDefaultPerQueryLimit;
};

/// One task per query, in input order.
std::vector<FetchTask> plan_fetch(const std::vector<Query>& queries,
                                  std::size_t limit = kDefaultPerQueryLimit,
                                  bool error_on_empty = false);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{200};
  std::chrono::milliseconds max_delay{5000};
  bool jitter = true;
};

/// Minimum spacing between calls, shared by all workers.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

struct FetchOptions {
  std::size_t workers = kDefaultWorkers;
  RetryPolicy retry;
  std::uint64_t seed = 0;  // backoff jitter only; never affects content
};

struct FetchReport {
  std::size_t tasks = 0;
  std::size_t search_failures = 0;
  std::size_t candidates = 0;
  std::size_t skipped_existing = 0;
  std::size_t downloads = 0;  // distinct URIs downloaded this run
  std::size_t retries = 0;
  std::size_t fetched = 0;
  std::size_t broken = 0;
  std::size_t duplicate = 0;
  std::size_t pending = 0;  // gave up after retries; retried on the next run
  std::vector<std::string> errors;
};

/// Runs the tasks on a bounded worker pool. New records are appended to
/// `writer` (when given) and folded into `manifest` in task order, so the
/// result does not depend on the worker count. Records that already exist
/// in a non-pending state are skipped.
FetchReport run_fetch(const std::vector<FetchTask>& tasks, SearchBackend& backend,
                      Manifest& manifest, const ContentStore& store, const FetchOptions& options,
                      ManifestWriter* writer = nullptr);

struct DedupReport {
  std::size_t checked = 0;
  std::size_t malformed = 0;
  std::size_t duplicate = 0;
  std::size_t retained = 0;
  std::vector<std::string> integrity_errors;  // "sample_id: reason"
};

/// Marks undecodable payloads malformed and repeated content duplicate, in
/// manifest order.
DedupReport dedup_and_validate(Manifest& manifest, const ContentStore& store);

// Backends -------------------------------------------------------------

struct MockOptions {
  std::uint64_t seed = 0;
  std::size_t results_per_query = kDefaultPerQueryLimit;
  double broken_rate = 0.0;
  double malformed_rate = 0.0;
  /// Fraction of URIs whose payload repeats another URI's content.
  double duplicate_rate = 0.0;
  /// Fraction of URIs whose first download attempt fails with TransportError.
  double transient_rate = 0.0;
};

/// Deterministic in-memory backend. For each URI u, draw
///   r = unit(splitmix64(seed ^ fnv1a64(u)))
/// and classify: r < broken → broken; next malformed band → truncated PNG;
/// next duplicate band → shared payload; else a unique PNG payload.
class MockBackend : public SearchBackend {
 public:
  explicit MockBackend(MockOptions options) : options_(options) {}

  BackendInfo info() const override;
  std::vector<std::string> search(std::string_view query, std::size_t limit) override;
  Download fetch(std::string_view uri) override;

  std::size_t fetch_calls() const;

  static double unit_draw(std::uint64_t seed, std::string_view uri);

 private:
  MockOptions options_;
  mutable std::mutex mu_;
  std::size_t fetch_calls_ = 0;
  std::unordered_map<std::string, int> attempts_;
};

/// Directory tree <root>/<query-slug>/<files>. Files are returned sorted by
/// name as file:// URIs.
class LocalCorpusBackend : public SearchBackend {
 public:
  explicit LocalCorpusBackend(std::filesystem::path root) : root_(std::move(root)) {}
  BackendInfo info() const override;
  std::vector<std::string> search(std::string_view query, std::size_t limit) override;

 private:
  std::filesystem::path root_;
};

/// Image-search HTTP API. GET <endpoint>?q=<query>&count=<limit> with the
/// key in Ocp-Apim-Subscription-Key. Accepts {"value":[{"contentUrl":..}]}
/// or {"items":[{"link":..}]} replies.
class HttpSearchBackend : public SearchBackend {
 public:
  HttpSearchBackend(std::string endpoint, std::string api_key, double requests_per_second = 3.0);
  /// Reads ADC_SEARCH_ENDPOINT and ADC_SEARCH_KEY.
  static std::unique_ptr<HttpSearchBackend> from_env();

  BackendInfo info() const override;
  std::vector<std::string> search(std::string_view query, std::size_t limit) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  double rps_;
};

/// Builds "mock", "local" or "http" backends.
std::unique_ptr<SearchBackend> make_backend(std::string_view name,
                                            const std::filesystem::path& corpus_root,
                                            const MockOptions& mock);

// Fixture payloads.
std::vector<std::uint8_t> synthesize_png(std::uint64_t seed, std::size_t body_bytes = 64);
std::vector<std::uint8_t> synthesize_jpeg(std::uint64_t seed, std::size_t body_bytes = 64);

}  // namespace adc
