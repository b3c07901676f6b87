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

#include <doctest.h>

#include <atomic>
#include <set>

#include "adc/collector.hpp"
#include "adc/content.hpp"
#include "adc/hashing.hpp"
#include "support.hpp"

using namespace adc;

namespace {

std::vector<Query> make_queries(std::size_t n) {
  std::vector<Query> q;
  for (std::size_t i = 0; i < n; ++i)
    q.push_back({SubclassKey{static_cast<std::int32_t>(i % 3), {static_cast<std::int32_t>(i)}},
                 "shade" + std::to_string(i) + " wool sweater"});
  return q;
}

FetchOptions fast(std::size_t workers) {
  FetchOptions o;
  o.workers = workers;
  o.retry.base_delay = std::chrono::milliseconds(0);
  return o;
}

// Returns more URIs than asked for, which the collector must cut.
class GreedyBackend : public MockBackend {
 public:
  using MockBackend::MockBackend;
  std::vector<std::string> search(std::string_view query, std::size_t) override {
    return MockBackend::search(query, 150);
  }
};

// Every URI fails with a transport error until `healthy` is set.
class FlakyBackend : public MockBackend {
 public:
  using MockBackend::MockBackend;
  std::atomic<bool> healthy{false};
  Download fetch(std::string_view uri) override {
    if (!healthy) throw TransportError("down");
    return MockBackend::fetch(uri);
  }
};

class FailingSearch : public MockBackend {
 public:
  using MockBackend::MockBackend;
  std::vector<std::string> search(std::string_view query, std::size_t limit) override {
    if (query.starts_with("shade1 ")) throw TransportError("search down");
    return MockBackend::search(query, limit);
  }
};

// Two queries share every URI.
class SharedUris : public MockBackend {
 public:
  using MockBackend::MockBackend;
  std::vector<std::string> search(std::string_view, std::size_t limit) override {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min<std::size_t>(limit, 5); ++i) out.push_back("mock://shared/" + std::to_string(i));
    return out;
  }
};

}  // namespace

TEST_CASE("plan_fetch") {
  const auto tasks = plan_fetch(make_queries(12000), 100);
  CHECK(tasks.size() == 12000);
  for (const auto& t : tasks) CHECK(t.limit == 100);
  CHECK(tasks[7].query == "shade7 wool sweater");
  CHECK(plan_fetch(make_queries(1), 1).size() == 1);
  CHECK(plan_fetch({}, 100).empty());
  CHECK_THROWS_AS(plan_fetch({}, 100, true), ValidationError);
  CHECK_THROWS_AS(plan_fetch(make_queries(1), 0), RangeError);
}

TEST_CASE("500 fetched records and a no-op rerun") {
  test::TempDir dir("collect");
  MockBackend backend({.seed = 1});
  ContentStore store(dir / "store");
  Manifest m({"v", 1});
  const auto tasks = plan_fetch(make_queries(5), 100);
  const auto rep = run_fetch(tasks, backend, m, store, fast(30));
  CHECK(rep.fetched == 500);
  CHECK(m.size() == 500);
  CHECK(m.count(FetchStatus::kFetched) == 500);
  CHECK(rep.downloads == 500);
  CHECK(backend.fetch_calls() == 500);
  CHECK_NOTHROW(m.check_invariants());

  const auto before = serialize_manifest(m);
  const auto again = run_fetch(tasks, backend, m, store, fast(30));
  CHECK(again.downloads == 0);
  CHECK(again.skipped_existing == 500);
  CHECK(backend.fetch_calls() == 500);
  CHECK(serialize_manifest(m) == before);
}

TEST_CASE("broken links match the seeded mock exactly") {
  test::TempDir dir("broken");
  MockOptions mo{.seed = 2024, .broken_rate = 0.10};
  MockBackend backend(mo);
  ContentStore store(dir / "store");
  Manifest m;
  const auto tasks = plan_fetch(make_queries(10), 100);
  const auto rep = run_fetch(tasks, backend, m, store, fast(8));
  std::size_t expected_broken = 0;
  for (const auto& t : tasks)
    for (const auto& uri : MockBackend(mo).search(t.query, t.limit))
      expected_broken += MockBackend::unit_draw(mo.seed, uri) < 0.10;
  CHECK(rep.candidates == 1000);
  CHECK(rep.broken == expected_broken);
  CHECK(rep.fetched == 1000 - expected_broken);
  CHECK(m.count(FetchStatus::kBroken) == expected_broken);
  CHECK(expected_broken > 60);
  CHECK(expected_broken < 140);
}

TEST_CASE("manifest does not depend on the worker count") {
  MockOptions mo{.seed = 9, .broken_rate = 0.05, .malformed_rate = 0.05, .duplicate_rate = 0.05, .transient_rate = 0.1};
  const auto tasks = plan_fetch(make_queries(12), 40);
  std::vector<std::string> outputs;
  for (std::size_t workers : {1u, 4u, 30u}) {
    test::TempDir dir("workers");
    MockBackend backend(mo);
    ContentStore store(dir / "store");
    Manifest m({"v", 9});
    {
      ManifestWriter w(dir / "m.jsonl", m.header());
      run_fetch(tasks, backend, m, store, fast(workers), &w);
    }
    dedup_and_validate(m, store);
    outputs.push_back(serialize_manifest(m));
    // the append log folds to the same records (before dedup)
    CHECK(load_manifest(dir / "m.jsonl").size() == m.size());
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0] == outputs[2]);
}

TEST_CASE("per-query cutoff of 100") {
  test::TempDir dir("cutoff");
  GreedyBackend backend(MockOptions{.seed = 3, .results_per_query = 150});
  ContentStore store(dir / "store");
  Manifest m;
  const auto rep = run_fetch(plan_fetch(make_queries(2), 100), backend, m, store, fast(4));
  CHECK(rep.candidates == 200);
  CHECK(m.size() == 200);
}

TEST_CASE("transient failures are retried") {
  test::TempDir dir("transient");
  MockOptions mo{.seed = 5, .transient_rate = 0.3};
  MockBackend backend(mo);
  ContentStore store(dir / "store");
  Manifest m;
  const auto tasks = plan_fetch(make_queries(3), 50);
  const auto rep = run_fetch(tasks, backend, m, store, fast(4));
  std::size_t transient = 0;
  for (const auto& t : tasks)
    for (const auto& uri : backend.search(t.query, t.limit))
      transient += MockBackend::unit_draw(mo.seed ^ 0x7472616E7369656EULL, uri) < 0.3;
  CHECK(rep.fetched == 150);
  CHECK(rep.retries == transient);
  CHECK(backend.fetch_calls() == 150 + transient);
}

TEST_CASE("exhausted retries leave records pending for the next run") {
  test::TempDir dir("pending");
  FlakyBackend backend(MockOptions{.seed = 6});
  ContentStore store(dir / "store");
  Manifest m;
  const auto tasks = plan_fetch(make_queries(2), 10);
  auto opts = fast(2);
  const auto first = run_fetch(tasks, backend, m, store, opts);
  CHECK(first.pending == 20);
  CHECK(first.errors.size() == 20);
  CHECK(m.count(FetchStatus::kPending) == 20);
  CHECK(first.retries == 40);
  backend.healthy = true;
  const auto second = run_fetch(tasks, backend, m, store, opts);
  CHECK(second.fetched == 20);
  CHECK(m.count(FetchStatus::kPending) == 0);
  CHECK(m.size() == 20);
}

TEST_CASE("search failures are reported and the run continues") {
  test::TempDir dir("searchfail");
  FailingSearch backend(MockOptions{.seed = 7});
  ContentStore store(dir / "store");
  Manifest m;
  const auto rep = run_fetch(plan_fetch(make_queries(3), 10), backend, m, store, fast(3));
  CHECK(rep.search_failures == 1);
  CHECK(rep.fetched == 20);
  REQUIRE(rep.errors.size() == 1);
  CHECK(rep.errors[0].find("search down") != std::string::npos);
}

TEST_CASE("each URI is downloaded at most once per run") {
  test::TempDir dir("shared");
  SharedUris backend(MockOptions{.seed = 8});
  ContentStore store(dir / "store");
  Manifest m;
  const auto rep = run_fetch(plan_fetch(make_queries(4), 10), backend, m, store, fast(4));
  CHECK(rep.downloads == 5);
  CHECK(backend.fetch_calls() == 5);
  CHECK(m.size() == 20);
  CHECK(m.count(FetchStatus::kFetched) == 5);
  CHECK(m.count(FetchStatus::kDuplicate) == 15);
  // the first query owns the content
  for (const auto* r : m.fetched()) CHECK(r->query == "shade0 wool sweater");
}

TEST_CASE("argument errors") {
  test::TempDir dir("args");
  MockBackend backend(MockOptions{});
  ContentStore store(dir / "store");
  Manifest m;
  CHECK_THROWS_AS(run_fetch(plan_fetch(make_queries(1), 1), backend, m, store, fast(0)), RangeError);
  std::vector<FetchTask> bad{{{0, {0}}, "q", 0}};
  CHECK_THROWS_AS(run_fetch(bad, backend, m, store, fast(1)), RangeError);
}

TEST_CASE("dedup marks duplicates, malformed payloads and missing content") {
  test::TempDir dir("dedup");
  ContentStore store(dir / "store");
  const auto png = synthesize_png(1);
  const std::vector<std::uint8_t> empty;
  const auto h_png = store.put(png);
  const auto h_empty = store.put(empty);
  auto mk = [](std::string id, std::string hash) {
    SampleRecord r;
    r.sample_id = std::move(id);
    r.status = FetchStatus::kFetched;
    r.content_hash = std::move(hash);
    return r;
  };
  Manifest m;
  m.upsert(mk("a", h_png));
  m.upsert(mk("b", h_png));
  m.upsert(mk("c", h_empty));
  m.upsert(mk("d", std::string(64, '0')));
  const auto rep = dedup_and_validate(m, store);
  CHECK(m.find("a")->status == FetchStatus::kFetched);
  CHECK(m.find("b")->status == FetchStatus::kDuplicate);
  CHECK(m.find("c")->status == FetchStatus::kMalformed);
  CHECK(rep.duplicate == 1);
  CHECK(rep.malformed == 1);
  CHECK(rep.retained == 1);
  REQUIRE(rep.integrity_errors.size() == 1);
  CHECK(rep.integrity_errors[0].starts_with("d: "));
}

TEST_CASE("local corpus with 90 valid and 10 truncated images per query keeps 90") {
  test::TempDir dir("corpus");
  const auto queries = make_queries(3);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto sub = dir / "corpus" / slugify(queries[q].text);
    std::filesystem::create_directories(sub);
    for (int i = 0; i < 100; ++i) {
      auto bytes = (i % 2) ? synthesize_png(q * 1000 + i) : synthesize_jpeg(q * 1000 + i);
      if (i >= 90) bytes.resize(bytes.size() - 3);
      char name[32];
      std::snprintf(name, sizeof name, "img%03d.bin", i);
      write_file_atomic(sub / name, std::string(bytes.begin(), bytes.end()));
    }
  }
  LocalCorpusBackend backend(dir / "corpus");
  CHECK(backend.search(queries[0].text, 5).size() == 5);
  CHECK(backend.search("no such query", 5).empty());
  const auto listed = backend.search(queries[0].text, 100);
  CHECK(std::is_sorted(listed.begin(), listed.end()));
  CHECK(listed[0].starts_with("file:///"));

  ContentStore store(dir / "store");
  Manifest m;
  run_fetch(plan_fetch(queries, 100), backend, m, store, fast(4));
  const auto rep = dedup_and_validate(m, store);
  CHECK(rep.malformed == 30);
  CHECK(rep.retained == 270);
  std::map<std::string, std::size_t> per_query;
  for (const auto* r : m.fetched()) ++per_query[r->query];
  for (const auto& [_, n] : per_query) CHECK(n == 90);
}

TEST_CASE("missing local file is a broken link") {
  LocalCorpusBackend backend("/nonexistent");
  CHECK(backend.fetch("file:///nonexistent/x.png").status == DownloadStatus::kBroken);
  CHECK(backend.fetch("gopher://x").status == DownloadStatus::kBroken);
}

TEST_CASE("image sniffing") {
  CHECK(sniff_image(synthesize_png(1)).ok());
  CHECK(sniff_image(synthesize_jpeg(1)).ok());
  auto png = synthesize_png(2);
  png.resize(png.size() / 2);
  CHECK_FALSE(sniff_image(png).ok());
  auto jpg = synthesize_jpeg(2);
  jpg.pop_back();
  CHECK_FALSE(sniff_image(jpg).ok());
  CHECK_FALSE(sniff_image(std::vector<std::uint8_t>{}).ok());
  const std::string gif = std::string("GIF89a") + std::string(10, '\0') + ";";
  CHECK(sniff_image(std::vector<std::uint8_t>(gif.begin(), gif.end())).ok());
  const std::string text = "<html>not an image</html>";
  CHECK_FALSE(sniff_image(std::vector<std::uint8_t>(text.begin(), text.end())).ok());
}

TEST_CASE("content store is content addressed and idempotent") {
  test::TempDir dir("store");
  ContentStore store(dir / "s");
  const auto bytes = synthesize_png(4);
  const auto h = store.put(bytes);
  CHECK(h == sha256_hex(bytes));
  CHECK(store.put(bytes) == h);
  CHECK(store.contains(h));
  CHECK(store.path_for(h) == dir / "s" / h.substr(0, 2) / h);
  CHECK(*store.get(h) == bytes);
  CHECK_FALSE(store.get(std::string(64, 'f')).has_value());
}

TEST_CASE("make_backend") {
  CHECK(make_backend("mock", {}, {})->info().name == "mock");
  CHECK(make_backend("local", "/tmp", {})->info().name == "local");
  CHECK_THROWS(make_backend("carrier-pigeon", {}, {}));
}
