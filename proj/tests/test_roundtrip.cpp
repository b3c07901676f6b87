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

#include <cstring>
#include <limits>
#include <set>

#include "adc/embedstore.hpp"
#include "adc/manifest.hpp"
#include "adc/report_io.hpp"
#include "adc/votes.hpp"
#include "support.hpp"

using namespace adc;

namespace {

std::string random_id(Rng& rng) {
  static constexpr char kChars[] = "abcdefghijklmnopqrstuvwxyz0123456789_-.";
  std::string s;
  const std::size_t len = 1 + rng.uniform_index(24);
  for (std::size_t i = 0; i < len; ++i) s.push_back(kChars[rng.uniform_index(sizeof kChars - 1)]);
  return s;
}

// Free text for JSON fields: quotes, backslashes, control and UTF-8 bytes.
std::string random_text(Rng& rng) {
  static const std::vector<std::string> kBits{"a", "Z", " ", "\"", "\\", "\t", "\n", "é", "ß", "日本", "/", ",", "{", "}"};
  std::string s;
  const std::size_t len = rng.uniform_index(12);
  for (std::size_t i = 0; i < len; ++i) s += kBits[rng.uniform_index(kBits.size())];
  return s;
}

float random_float(Rng& rng) {
  switch (rng.uniform_index(6)) {
    case 0: return 0.0f;
    case 1: return -0.0f;
    case 2: return std::numeric_limits<float>::denorm_min() * static_cast<float>(1 + rng.uniform_index(100));
    case 3: return static_cast<float>(rng.normal() * 1e30);
    default: return static_cast<float>(rng.normal());
  }
}

double random_double(Rng& rng) {
  switch (rng.uniform_index(4)) {
    case 0: return 0.0;
    case 1: return rng.normal() * 1e-300;
    case 2: return rng.normal() * 1e12;
    default: return rng.normal();
  }
}

std::vector<std::string> unique_ids(Rng& rng, std::size_t n) {
  std::set<std::string> seen;
  std::vector<std::string> ids;
  while (ids.size() < n) {
    auto id = random_id(rng);
    if (seen.insert(id).second) ids.push_back(std::move(id));
  }
  return ids;
}

}  // namespace

TEST_CASE("embedding files") {
  test::TempDir dir("rt-emb");
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40), d = 1 + rng.uniform_index(20);
    std::vector<float> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) data[i * d + j] = random_float(rng);
      data[i * d + rng.uniform_index(d)] = 1.0f + static_cast<float>(rng.uniform());  // non-zero row
    }
    const EmbeddingMatrix m(n, d, data, unique_ids(rng, n));
    write_embeddings(m, dir / "a.adce");
    write_embeddings(read_embeddings(dir / "a.adce"), dir / "b.adce");
    CHECK(read_file(dir / "a.adce") == read_file(dir / "b.adce"));
    CHECK(read_file(sidecar_path(dir / "a.adce")) == read_file(sidecar_path(dir / "b.adce")));
    const auto back = read_embeddings(dir / "b.adce");
    CHECK(std::memcmp(back.data().data(), data.data(), data.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("probability files") {
  test::TempDir dir("rt-prob");
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40), k = 2 + rng.uniform_index(10);
    auto p = test::random_probs(n, k, rng.next());
    if (rng.uniform() < 0.5) p.row_ids = unique_ids(rng, n);
    write_probs(p, dir / "a.adcp");
    write_probs(read_probs(dir / "a.adcp"), dir / "b.adcp");
    CHECK(read_file(dir / "a.adcp") == read_file(dir / "b.adcp"));
    CHECK(read_probs(dir / "b.adcp").data == p.data);
  }
}

TEST_CASE("manifest files") {
  test::TempDir dir("rt-man");
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Manifest m({random_text(rng), rng.next()});
    const std::size_t n = rng.uniform_index(30);
    const auto ids = unique_ids(rng, n);
    for (std::size_t i = 0; i < n; ++i) {
      SampleRecord r;
      r.sample_id = ids[i];
      r.key.class_index = static_cast<ClassIndex>(rng.uniform_index(12));
      for (std::size_t a = rng.uniform_index(4); a > 0; --a)
        r.key.option_indices.push_back(static_cast<std::int32_t>(rng.uniform_index(10)));
      r.webly_label = r.key.class_index;
      r.query = random_text(rng);
      r.uri = "https://example.com/" + random_text(rng);
      r.status = static_cast<FetchStatus>(rng.uniform_index(kFetchStatusCount));
      if (r.status == FetchStatus::kFetched || rng.uniform() < 0.3) {
        char h[65];
        std::snprintf(h, sizeof h, "%016llx%016llx%016llx%016llx", static_cast<unsigned long long>(rng.next()),
                      static_cast<unsigned long long>(rng.next()), static_cast<unsigned long long>(rng.next()),
                      static_cast<unsigned long long>(rng.next()));
        r.content_hash = h;
        r.byte_size = rng.next() >> 12;
      }
      r.split = static_cast<Split>(rng.uniform_index(4));
      r.clean_candidate = rng.uniform() < 0.5;
      m.upsert(std::move(r));
    }
    save_manifest(m, dir / "a.jsonl");
    const auto back = load_manifest(dir / "a.jsonl");
    save_manifest(back, dir / "b.jsonl");
    CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));
    CHECK(back.records() == m.records());
    CHECK(back.header() == m.header());
  }
}

TEST_CASE("report files") {
  test::TempDir dir("rt-rep");
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    CurationReport r;
    r.method = random_text(rng);
    r.seed = rng.next();
    const std::size_t n = rng.uniform_index(40);
    for (const auto& id : unique_ids(rng, n)) {
      CurationEntry e{id, random_double(rng), rng.uniform() < 0.4, {}};
      if (e.flag && rng.uniform() < 0.5) e.suggested_label = static_cast<ClassIndex>(rng.uniform_index(12));
      r.entries.push_back(e);
    }
    save_report(r, dir / "a.rep");
    const auto back = load_report(dir / "a.rep");
    save_report(back, dir / "b.rep");
    CHECK(read_file(dir / "a.rep") == read_file(dir / "b.rep"));
    CHECK(back.entries == r.entries);
  }
}

TEST_CASE("votes files") {
  test::TempDir dir("rt-votes");
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VoteRecord> recs;
    const std::size_t n = rng.uniform_index(40);
    for (const auto& id : unique_ids(rng, n)) {
      VoteRecord v{id, {}, {}};
      const std::size_t nv = 1 + rng.uniform_index(3);
      const bool with_ids = rng.uniform() < 0.5;
      for (std::size_t i = 0; i < nv; ++i) {
        v.votes.push_back(static_cast<Vote>(rng.uniform_index(3)));
        if (with_ids) v.annotator_ids.push_back(random_id(rng));
      }
      recs.push_back(v);
    }
    save_votes(recs, dir / "a.csv");
    const auto back = load_votes(dir / "a.csv");
    save_votes(back, dir / "b.csv");
    CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));
    CHECK(back == recs);
  }
}

TEST_CASE("filter bundle files") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ClassIndex> labels(20 + rng.uniform_index(200));
    for (auto& l : labels) l = static_cast<ClassIndex>(rng.uniform_index(4));
    const auto set = export_filter_bundles(test::labelled_manifest(labels), {.seed = rng.next()});
    const auto text = serialize_bundles(set);
    CHECK(serialize_bundles(parse_bundles(text)) == text);
  }
}
