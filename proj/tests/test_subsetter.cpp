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

#include <map>
#include <numeric>

#include "adc/subsetter.hpp"
#include "support.hpp"

using namespace adc;

namespace {

void check_row(const ClassDistribution& d, const std::vector<std::size_t>& want, std::size_t total) {
  REQUIRE(d.counts.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CAPTURE(i);
    CHECK(std::llabs(static_cast<long long>(d.counts[i]) - static_cast<long long>(want[i])) <= 1);
  }
  CHECK(std::llabs(static_cast<long long>(d.total()) - static_cast<long long>(total)) <= 12);
}

CurationReport report_for(const Manifest& m, std::string method, const std::vector<bool>& flags) {
  CurationReport r;
  r.method = std::move(method);
  for (std::size_t i = 0; i < flags.size(); ++i) r.entries.push_back({m.records()[i].sample_id, 0, flags[i], {}});
  return r;
}

}  // namespace

TEST_CASE("long-tail rows") {
  const auto r10 = longtail_counts(39297, 12, 10);
  check_row(r10, {39297, 31875, 25854, 20971, 17010, 13797, 11191, 9078, 7363, 5972, 4844, 3929}, 191181);
  CHECK(r10.counts.front() == 39297);
  CHECK(r10.counts.back() == 3929);
  check_row(longtail_counts(39297, 12, 50), {39297, 27536, 19295, 13520, 9474, 6638, 4652, 3259, 2284, 1600, 1121, 785},
            129461);
  check_row(longtail_counts(39297, 12, 100), {39297, 25854, 17010, 11191, 7363, 4844, 3187, 2097, 1379, 907, 597, 392},
            114118);
  const auto flat = longtail_counts(500, 4, 1);
  CHECK(flat.counts == std::vector<std::size_t>(4, 500));
}

TEST_CASE("long-tail profile properties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(30);
    const double rho = 1.0 + rng.uniform() * 200;
    const std::size_t n_max = static_cast<std::size_t>(rho) + 1 + rng.uniform_index(100000);
    const auto d = longtail_counts(n_max, k, rho);
    CHECK(d.counts.front() == n_max);
    CHECK(d.counts.back() == static_cast<std::size_t>(std::floor(double(n_max) / rho * (1 + 1e-12))));
    for (std::size_t i = 1; i < k; ++i) CHECK(d.counts[i] <= d.counts[i - 1]);
    const double ratio = double(d.counts.front()) / double(d.counts.back());
    CHECK(ratio >= rho - 1e-9);
    CHECK(ratio <= double(n_max) / (double(n_max) / rho - 1.0));
  }
}

TEST_CASE("long-tail parameter errors") {
  CHECK_THROWS_AS(longtail_counts(100, 1, 10), RangeError);
  CHECK_THROWS_AS(longtail_counts(100, 12, 0.5), RangeError);
  CHECK_THROWS_AS(longtail_counts(5, 12, 10), RangeError);
}

TEST_CASE("long-tail subset") {
  const auto m = test::labelled_manifest({0, 0, 0, 0, 1, 1, 1, 1});
  ClassDistribution d{{2, 1}, 2.0, 2};
  const auto a = build_longtail_subset(m, d, 7);
  std::map<ClassIndex, std::size_t> per;
  for (const auto& r : a.manifest.records()) ++per[r.webly_label];
  CHECK(per[0] == 2);
  CHECK(per[1] == 1);
  CHECK(a.class_order == std::vector<ClassIndex>{0, 1});
  CHECK(serialize_manifest(build_longtail_subset(m, d, 7).manifest) == serialize_manifest(a.manifest));

  const auto short_class = test::labelled_manifest({0, 0, 0, 0, 1});
  ClassDistribution big{{2, 2}, 1.0, 2};
  try {
    build_longtail_subset(short_class, big, 1);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("class 1") != std::string::npos);
  }
}

TEST_CASE("clean subset retains 54.85%") {
  const auto m = test::labelled_manifest(std::vector<ClassIndex>(10000, 0));
  std::vector<bool> a(10000, false), b(10000, false);
  for (std::size_t i = 0; i < 2636; ++i) a[i] = true;
  for (std::size_t i = 2015; i < 4515; ++i) b[i] = true;
  const CurationReport reps[] = {report_for(m, "simifeat", a), report_for(m, "conf", b)};
  const auto c = build_clean_subset(m, reps);
  CHECK(c.retained == 5485);
  CHECK(c.retained_fraction == 0.5485);
  CHECK(c.removed_fraction == 0.4515);
  CHECK(c.stats.overlap_count == 621);
  CHECK(c.manifest.size() == 5485);
  CHECK(c.manifest.find("r4515") != nullptr);
  CHECK(c.manifest.find("r0") == nullptr);
}

TEST_CASE("clean subset edge cases") {
  const auto m = test::labelled_manifest({0, 1, 0, 1});
  const auto id = build_clean_subset(m, {});
  CHECK(serialize_manifest(id.manifest) == serialize_manifest(m));
  const CurationReport all[] = {report_for(m, "x", {true, true, true, true})};
  const auto none = build_clean_subset(m, all);
  CHECK(none.manifest.empty());
  CHECK_FALSE(none.warnings.empty());
  const CurationReport bad[] = {report_for(m, "x", {true, true})};
  CHECK_THROWS_AS(build_clean_subset(m, bad), ValidationError);
}

TEST_CASE("split of 1,076,738 samples") {
  std::vector<ClassIndex> labels(1076738);
  Rng rng(1);
  for (auto& l : labels) l = static_cast<ClassIndex>(rng.uniform_index(12));
  const auto splits = split_labels(labels, {.seed = 5});
  const auto c = count_splits(splits);
  CHECK(c.train == 1036738);
  CHECK(c.eval == 20000);
  CHECK(c.test == 20000);
  CHECK(c.none == 0);
  CHECK(split_labels(labels, {.seed = 5}) == splits);

  // stratified: per-class eval share follows class share to within one row
  std::vector<std::size_t> cls(12), ev(12);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++cls[labels[i]];
    ev[labels[i]] += splits[i] == Split::kEval;
  }
  for (std::size_t k = 0; k < 12; ++k)
    CHECK(std::abs(double(ev[k]) - 20000.0 * double(cls[k]) / double(labels.size())) < 1.0);

  const auto tiny = count_splits(split_labels(labels, {.seed = 5, .tiny = 50000}));
  CHECK(tiny.train == 50000);
  CHECK(tiny.eval == 20000);
  CHECK(tiny.test == 20000);
  CHECK(tiny.train + tiny.eval + tiny.test + tiny.none == labels.size());
}

TEST_CASE("split manifest and errors") {
  auto m = test::labelled_manifest({0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
  SampleRecord broken = m.records()[0];
  broken.sample_id = "broken";
  broken.status = FetchStatus::kBroken;
  broken.content_hash.clear();
  broken.split = Split::kTrain;
  m.upsert(broken);
  const auto s = split_dataset(m, {.eval_size = 3, .test_size = 3, .seed = 2, .stratify = false});
  CHECK(s.find("broken")->split == Split::kNone);
  std::size_t train = 0;
  for (const auto& r : s.records()) train += r.split == Split::kTrain;
  CHECK(train == 4);
  const std::vector<ClassIndex> few(5, 0);
  CHECK_THROWS_AS(split_labels(few, {.eval_size = 3, .test_size = 3}), RangeError);
}

TEST_CASE("apportion") {
  const std::size_t w[] = {10, 10, 10};
  CHECK(apportion(10, w) == std::vector<std::size_t>{4, 3, 3});
  const std::size_t w2[] = {5, 0, 3};
  CHECK(apportion(8, w2) == std::vector<std::size_t>{5, 0, 3});
  const std::size_t w3[] = {2, 6};
  const auto a = apportion(7, w3);
  CHECK(a[0] + a[1] == 7);
  CHECK(a == std::vector<std::size_t>{2, 5});
  CHECK_THROWS_AS(apportion(11, w2), RangeError);
}
