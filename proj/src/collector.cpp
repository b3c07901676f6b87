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

#include "adc/collector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <optional>
#include <thread>
#include <unordered_set>

#include "adc/hashing.hpp"

namespace adc {

std::vector<FetchTask> plan_fetch(const std::vector<Query>& queries, std::size_t limit,
                                  bool error_on_empty) {
  if (limit < 1) throw RangeError("plan_fetch: limit must be >= 1");
  if (queries.empty() && error_on_empty) throw ValidationError("plan_fetch: no queries");
  std::vector<FetchTask> tasks;
  tasks.reserve(queries.size());
  for (const auto& q : queries) tasks.push_back({q.key, q.text, limit});
  return tasks;
}

RateLimiter::RateLimiter(double per_second) {
  if (per_second > 0.0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

enum class Outcome { kFetched, kBroken, kPending };

struct UriResult {
  Outcome outcome = Outcome::kPending;
  std::string hash;
  std::uint64_t size = 0;
  std::string error;
};

class Backoff {
 public:
  Backoff(const RetryPolicy& policy, std::uint64_t seed) : policy_(policy), rng_(seed) {}

  void sleep(int attempt) {
    if (policy_.base_delay.count() <= 0) return;
    double ms = static_cast<double>(policy_.base_delay.count()) * std::pow(2.0, attempt - 1);
    ms = std::min(ms, static_cast<double>(policy_.max_delay.count()));
    if (policy_.jitter) ms *= 0.5 + 0.5 * rng_.uniform();
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }

 private:
  RetryPolicy policy_;
  Rng rng_;
};

struct RunState {
  RunState(const std::vector<FetchTask>& t, SearchBackend& b, const ContentStore& s, const FetchOptions& o)
      : tasks(t), backend(b), store(s), options(o), limiter(b.info().requests_per_second) {}

  const std::vector<FetchTask>& tasks;
  SearchBackend& backend;
  const ContentStore& store;
  const FetchOptions& options;
  RateLimiter limiter;
  std::unordered_set<std::string> settled_ids;  // read-only after construction

  std::mutex cache_mu;
  std::unordered_map<std::string, std::shared_future<UriResult>> uri_cache;

  std::atomic<std::size_t> next_task{0};
  std::atomic<std::size_t> search_failures{0};
  std::atomic<std::size_t> candidates{0};
  std::atomic<std::size_t> skipped{0};
  std::atomic<std::size_t> downloads{0};
  std::atomic<std::size_t> retries{0};
  std::atomic<bool> abort{false};

  std::mutex errors_mu;
  std::vector<std::string> errors;

  void note_error(std::string e) {
    std::lock_guard lock(errors_mu);
    errors.push_back(std::move(e));
  }
};

UriResult download_once(RunState& st, const std::string& uri, Backoff& backoff) {
  UriResult res;
  for (int attempt = 1; attempt <= std::max(1, st.options.retry.attempts); ++attempt) {
    try {
      st.limiter.acquire();
      Download d = st.backend.fetch(uri);
      if (d.status == DownloadStatus::kBroken) {
        res.outcome = Outcome::kBroken;
      } else {
        res.outcome = Outcome::kFetched;
        res.size = d.bytes.size();
        res.hash = st.store.put(d.bytes);
      }
      return res;
    } catch (const TransportError& e) {
      res.error = e.what();
      if (attempt < st.options.retry.attempts) {
        st.retries.fetch_add(1);
        backoff.sleep(attempt);
      }
    }
  }
  res.outcome = Outcome::kPending;
  return res;
}

UriResult download_shared(RunState& st, const std::string& uri, Backoff& backoff) {
  std::promise<UriResult> promise;
  std::shared_future<UriResult> fut;
  bool owner = false;
  {
    std::lock_guard lock(st.cache_mu);
    auto it = st.uri_cache.find(uri);
    if (it == st.uri_cache.end()) {
      fut = promise.get_future().share();
      st.uri_cache.emplace(uri, fut);
      owner = true;
    } else {
      fut = it->second;
    }
  }
  if (owner) {
    st.downloads.fetch_add(1);
    try {
      promise.set_value(download_once(st, uri, backoff));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return fut.get();
}

std::vector<SampleRecord> run_task(RunState& st, const FetchTask& task, Backoff& backoff) {
  std::vector<SampleRecord> out;
  std::vector<std::string> uris;
  bool searched = false;
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, st.options.retry.attempts); ++attempt) {
    try {
      st.limiter.acquire();
      uris = st.backend.search(task.query, task.limit);
      searched = true;
      break;
    } catch (const TransportError& e) {
      last_error = e.what();
      if (attempt < st.options.retry.attempts) {
        st.retries.fetch_add(1);
        backoff.sleep(attempt);
      }
    }
  }
  if (!searched) {
    st.search_failures.fetch_add(1);
    st.note_error("search '" + task.query + "': " + last_error);
    return out;
  }

  // Per-query cutoff, applied even if the backend over-delivers.
  if (uris.size() > task.limit) uris.resize(task.limit);
  std::unordered_set<std::string> seen;
  for (const auto& uri : uris) {
    if (!seen.insert(uri).second) continue;
    st.candidates.fetch_add(1);
    SampleRecord rec;
    rec.sample_id = make_sample_id(task.query, uri);
    if (st.settled_ids.contains(rec.sample_id)) {
      st.skipped.fetch_add(1);
      continue;
    }
    rec.key = task.key;
    rec.webly_label = task.key.class_index;
    rec.query = task.query;
    rec.uri = uri;
    const UriResult r = download_shared(st, uri, backoff);
    switch (r.outcome) {
      case Outcome::kFetched:
        rec.status = FetchStatus::kFetched;
        rec.content_hash = r.hash;
        rec.byte_size = r.size;
        break;
      case Outcome::kBroken:
        rec.status = FetchStatus::kBroken;
        break;
      case Outcome::kPending:
        rec.status = FetchStatus::kPending;
        st.note_error("download '" + uri + "': " + r.error);
        break;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

FetchReport run_fetch(const std::vector<FetchTask>& tasks, SearchBackend& backend,
                      Manifest& manifest, const ContentStore& store, const FetchOptions& options,
                      ManifestWriter* writer) {
  if (options.workers < 1) throw RangeError("run_fetch: workers must be >= 1");
  for (const auto& t : tasks)
    if (t.limit < 1) throw RangeError("run_fetch: task limit must be >= 1");

  RunState st(tasks, backend, store, options);
  std::unordered_set<std::string> seen_hashes;
  for (const auto& r : manifest.records()) {
    if (r.status != FetchStatus::kPending) st.settled_ids.insert(r.sample_id);
    if (r.status == FetchStatus::kFetched) seen_hashes.insert(r.content_hash);
  }

  FetchReport report;
  report.tasks = tasks.size();

  // Reorder buffer: completed tasks are folded into the manifest strictly in
  // task order by whichever worker closes the gap.
  std::mutex merge_mu;
  std::vector<std::optional<std::vector<SampleRecord>>> done(tasks.size());
  std::size_t next_merge = 0;
  std::exception_ptr fatal;

  auto merge_ready = [&] {
    while (next_merge < done.size() && done[next_merge]) {
      for (auto& rec : *done[next_merge]) {
        if (rec.status == FetchStatus::kFetched && !seen_hashes.insert(rec.content_hash).second) {
          rec.status = FetchStatus::kDuplicate;
        }
        switch (rec.status) {
          case FetchStatus::kFetched: ++report.fetched; break;
          case FetchStatus::kBroken: ++report.broken; break;
          case FetchStatus::kDuplicate: ++report.duplicate; break;
          case FetchStatus::kPending: ++report.pending; break;
          case FetchStatus::kMalformed: break;
        }
        if (writer) writer->append(rec);
        manifest.upsert(std::move(rec));
      }
      done[next_merge].reset();
      ++next_merge;
    }
  };

  auto worker = [&](std::size_t worker_index) {
    Backoff backoff(options.retry, derive_seed(options.seed, "backoff") + worker_index);
    while (!st.abort.load()) {
      const std::size_t i = st.next_task.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        auto records = run_task(st, tasks[i], backoff);
        std::lock_guard lock(merge_mu);
        done[i] = std::move(records);
        merge_ready();
      } catch (...) {
        std::lock_guard lock(merge_mu);
        if (!fatal) fatal = std::current_exception();
        st.abort.store(true);
        return;
      }
    }
  };

  const std::size_t n_workers = std::min(options.workers, std::max<std::size_t>(tasks.size(), 1));
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
  }
  if (fatal) std::rethrow_exception(fatal);
  if (writer) writer->flush();

  report.search_failures = st.search_failures.load();
  report.candidates = st.candidates.load();
  report.skipped_existing = st.skipped.load();
  report.downloads = st.downloads.load();
  report.retries = st.retries.load();
  report.errors = std::move(st.errors);
  return report;
}

DedupReport dedup_and_validate(Manifest& manifest, const ContentStore& store) {
  DedupReport report;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    SampleRecord rec = manifest.records()[i];
    if (rec.status != FetchStatus::kFetched) continue;
    ++report.checked;
    if (rec.content_hash.empty()) {
      report.integrity_errors.push_back(rec.sample_id + ": fetched record has no content hash");
      continue;
    }
    const auto bytes = store.get(rec.content_hash);
    if (!bytes) {
      report.integrity_errors.push_back(rec.sample_id + ": content file missing");
      continue;
    }
    if (sha256_hex(*bytes) != rec.content_hash) {
      report.integrity_errors.push_back(rec.sample_id + ": content hash mismatch");
      continue;
    }
    if (bytes->empty() || !sniff_image(*bytes).ok()) {
      rec.status = FetchStatus::kMalformed;
      ++report.malformed;
    } else if (!seen.insert(rec.content_hash).second) {
      rec.status = FetchStatus::kDuplicate;
      ++report.duplicate;
    } else {
      ++report.retained;
      continue;
    }
    manifest.set(i, std::move(rec));
  }
  return report;
}

}  // namespace adc
