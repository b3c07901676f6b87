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

#include <thread>

#include "adc/hashing.hpp"
#include "adc/manifest.hpp"
#include "support.hpp"

using namespace adc;

namespace {

SampleRecord rec(std::string id, ClassIndex cls, FetchStatus st = FetchStatus::kFetched, std::string hash = "") {
  SampleRecord r;
  r.sample_id = std::move(id);
  r.key = {cls, {1, 2, 3}};
  r.webly_label = cls;
  r.query = "red wool \"cable\" sweater";
  r.uri = "mock://q/" + r.sample_id;
  r.status = st;
  if (st == FetchStatus::kFetched) r.content_hash = hash.empty() ? sha256_hex(std::string_view(r.sample_id)) : hash;
  r.byte_size = 123;
  return r;
}

}  // namespace

TEST_CASE("record field order is fixed") {
  const auto line = serialize_record(rec("a", 2));
  const char* fields[] = {"sample_id", "class_index", "option_indices", "webly_label", "query", "uri",
                          "content_hash", "byte_size", "status", "split", "clean_candidate"};
  std::size_t pos = 0;
  for (const char* f : fields) {
    const auto at = line.find(std::string("\"") + f + "\"");
    REQUIRE(at != std::string::npos);
    CHECK(at >= pos);
    pos = at;
  }
  CHECK(parse_record(line) == rec("a", 2));
}

TEST_CASE("enum spellings") {
  for (auto s : {FetchStatus::kPending, FetchStatus::kFetched, FetchStatus::kBroken, FetchStatus::kMalformed,
                 FetchStatus::kDuplicate})
    CHECK(parse_fetch_status(to_string(s)) == s);
  for (auto s : {Split::kNone, Split::kTrain, Split::kEval, Split::kTest}) CHECK(parse_split(to_string(s)) == s);
  CHECK_THROWS_AS(parse_fetch_status("lost"), FormatError);
  CHECK_THROWS_AS(parse_split("dev"), FormatError);
}

TEST_CASE("manifest round trip is byte identical") {
  Manifest m({"v7", 99});
  m.upsert(rec("a", 0));
  m.upsert(rec("b", 1, FetchStatus::kBroken));
  auto c = rec("c", 1);
  c.split = Split::kEval;
  c.clean_candidate = true;
  m.upsert(c);
  const auto text = serialize_manifest(m);
  const auto back = parse_manifest(text);
  CHECK(serialize_manifest(back) == text);
  CHECK(back.header() == m.header());
  CHECK(back.size() == 3);
}

TEST_CASE("later lines replace earlier ones") {
  Manifest m({"v", 0});
  m.upsert(rec("a", 0, FetchStatus::kPending));
  std::string text = serialize_manifest(m);
  text += serialize_record(rec("a", 0)) + "\n";
  const auto back = parse_manifest(text);
  REQUIRE(back.size() == 1);
  CHECK(back.records()[0].status == FetchStatus::kFetched);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_manifest(""), FormatError);
  CHECK_THROWS_AS(parse_manifest("{\"sample_id\":\"a\"}\n"), FormatError);
  CHECK_THROWS_AS(parse_manifest("{\"kind\":\"adc-manifest\",\"version\":9}\n"), FormatError);
  CHECK_THROWS_AS(parse_manifest("{\"kind\":\"adc-manifest\",\"version\":1}\n{oops\n"), FormatError);
  CHECK_THROWS_AS(parse_manifest("{\"kind\":\"adc-manifest\",\"version\":1}\n{\"sample_id\":\"a\"}\n"), FormatError);
}

TEST_CASE("upsert, set and lookups") {
  Manifest m;
  CHECK(m.upsert(rec("a", 0)));
  CHECK_FALSE(m.upsert(rec("a", 0, FetchStatus::kBroken)));
  CHECK(m.size() == 1);
  CHECK(m.find("a")->status == FetchStatus::kBroken);
  CHECK(m.find("zz") == nullptr);
  CHECK(m.index_of("a") == 0u);
  m.upsert(rec("b", 1));
  auto r = m.records()[1];
  r.split = Split::kTest;
  m.set(1, r);
  CHECK(m.find("b")->split == Split::kTest);
  r.sample_id = "other";
  CHECK_THROWS(m.set(1, r));
  CHECK(m.count(FetchStatus::kFetched) == 1);
  CHECK(m.fetched().size() == 1);
  CHECK(m.status_counts()[static_cast<std::size_t>(FetchStatus::kBroken)] == 1);
}

TEST_CASE("invariants") {
  SUBCASE("ok") {
    Manifest m;
    m.upsert(rec("a", 0));
    m.upsert(rec("b", 0, FetchStatus::kDuplicate));
    CHECK_NOTHROW(m.check_invariants());
  }
  SUBCASE("fetched needs hash") {
    Manifest m;
    auto r = rec("a", 0);
    r.content_hash.clear();
    m.upsert(r);
    CHECK_THROWS_AS(m.check_invariants(), ValidationError);
  }
  SUBCASE("label matches key") {
    Manifest m;
    auto r = rec("a", 0);
    r.webly_label = 3;
    m.upsert(r);
    CHECK_THROWS_AS(m.check_invariants(), ValidationError);
  }
  SUBCASE("shared content") {
    Manifest m;
    m.upsert(rec("a", 0, FetchStatus::kFetched, "h"));
    m.upsert(rec("b", 0, FetchStatus::kFetched, "h"));
    CHECK_THROWS_AS(m.check_invariants(), ValidationError);
  }
}

TEST_CASE("writer appends once-headed log from several threads") {
  test::TempDir dir("manifest");
  const auto path = dir / "m.jsonl";
  {
    ManifestWriter w(path, {"v", 5});
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
      ts.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) w.append(rec("t" + std::to_string(t) + "-" + std::to_string(i), 0));
      });
    for (auto& t : ts) t.join();
    w.flush();
  }
  {
    ManifestWriter again(path, {"v", 5});
    again.append(rec("t0-0", 0, FetchStatus::kBroken));
  }
  const auto m = load_manifest(path);
  CHECK(m.size() == 200);
  CHECK(m.find("t0-0")->status == FetchStatus::kBroken);
  CHECK(m.header().seed == 5);
  save_manifest(m, path);
  CHECK(load_manifest(path).size() == 200);
}
