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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

#include "adc/embedstore.hpp"
#include "support.hpp"

using namespace adc;

namespace {

std::vector<std::uint8_t> as_bytes(const std::string& s) { return {s.begin(), s.end()}; }

// Plain O(N^2) cosine top-k in double precision.
std::vector<std::vector<std::uint32_t>> brute_knn(const std::vector<float>& x, std::size_t n, std::size_t d,
                                                  std::size_t k) {
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += double(x[i * d + j]) * x[i * d + j];
    norm[i] = std::sqrt(s);
  }
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> sims;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == i) continue;
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += double(x[i * d + j]) * x[o * d + j];
      sims.push_back({-s / (norm[i] * norm[o]), static_cast<std::uint32_t>(o)});
    }
    std::sort(sims.begin(), sims.end());
    for (std::size_t r = 0; r < k; ++r) out[i].push_back(sims[r].second);
  }
  return out;
}

}  // namespace

TEST_CASE("3x4 round trip is bit exact") {
  test::TempDir dir("emb");
  std::vector<float> data{1.5f, -2.25f, 3e-7f, 4, 5, 6, 7, 8, -0.0f, 1e30f, 1, 2};
  EmbeddingMatrix m(3, 4, data, {"a", "b", "c"});
  write_embeddings(m, dir / "x.adce");
  const auto back = read_embeddings(dir / "x.adce");
  CHECK(back.n_rows() == 3);
  CHECK(back.dim() == 4);
  CHECK(back.row_ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(std::memcmp(back.data().data(), data.data(), data.size() * 4) == 0);
  CHECK(std::filesystem::file_size(dir / "x.adce") == 24 + 48);

  const auto h = read_container_header(dir / "x.adce");
  CHECK(h.rows == 3);
  CHECK(h.cols == 4);
  CHECK(h.kind == ContainerKind::kEmbedding);
}

TEST_CASE("header layout") {
  DenseMatrix m{2, 1, {1.0f, 2.0f}, {}};
  const auto bytes = encode_container(ContainerKind::kEmbedding, m);
  REQUIRE(bytes.size() == 32);
  CHECK(bytes.substr(0, 4) == "ADCE");
  std::uint32_t version, cols, dtype;
  std::uint64_t rows;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&rows, bytes.data() + 8, 8);
  std::memcpy(&cols, bytes.data() + 16, 4);
  std::memcpy(&dtype, bytes.data() + 20, 4);
  CHECK(version == 1);
  CHECK(rows == 2);
  CHECK(cols == 1);
  CHECK(dtype == 1);
  CHECK(encode_container(ContainerKind::kProbability, m).substr(0, 4) == "ADCP");
}

TEST_CASE("format errors") {
  DenseMatrix m{2, 2, {1, 2, 3, 4}, {}};
  auto bytes = encode_container(ContainerKind::kEmbedding, m);

  SUBCASE("wrong magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_container(as_bytes(bad), ContainerKind::kEmbedding), FormatError);
    CHECK_THROWS_AS(decode_container(as_bytes(bytes), ContainerKind::kProbability), FormatError);
  }
  SUBCASE("wrong version") {
    auto bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_container(as_bytes(bad), ContainerKind::kEmbedding), FormatError);
  }
  SUBCASE("wrong dtype") {
    auto bad = bytes;
    bad[20] = 2;
    CHECK_THROWS_AS(decode_container(as_bytes(bad), ContainerKind::kEmbedding), FormatError);
  }
  SUBCASE("short header") {
    CHECK_THROWS_AS(decode_container(as_bytes(bytes.substr(0, 10)), ContainerKind::kEmbedding), FormatError);
  }
  SUBCASE("truncated and oversized payload") {
    CHECK_THROWS_AS(decode_container(as_bytes(bytes.substr(0, bytes.size() - 1)), ContainerKind::kEmbedding),
                    FormatError);
    CHECK_THROWS_AS(decode_container(as_bytes(bytes + "x"), ContainerKind::kEmbedding), FormatError);
  }
  SUBCASE("NaN on read") {
    auto bad = bytes;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bad.data() + 24 + 4, &nan, 4);
    CHECK_THROWS(decode_container(as_bytes(bad), ContainerKind::kEmbedding));
  }
}

TEST_CASE("declared 1036738x512 with a truncated body") {
  test::TempDir dir("trunc");
  std::string header(24, '\0');
  std::memcpy(header.data(), "ADCE", 4);
  const std::uint32_t version = 1, cols = 512, dtype = 1;
  const std::uint64_t rows = 1036738;
  std::memcpy(header.data() + 4, &version, 4);
  std::memcpy(header.data() + 8, &rows, 8);
  std::memcpy(header.data() + 16, &cols, 4);
  std::memcpy(header.data() + 20, &dtype, 4);
  write_file_atomic(dir / "big.adce", header + std::string(4096, '\0'));
  try {
    read_embeddings(dir / "big.adce");
    FAIL("expected a truncation error");
  } catch (const FormatError& e) {
    // 24 + 1036738 * 512 * 4 bytes
    CHECK(std::string(e.what()).find("2123239448") != std::string::npos);
  }
}

TEST_CASE("invalid matrices are rejected") {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {nan, 1}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, 2, {inf, 1}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1, 1, 0, 0}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 1, {1, 2}, {"a", "a"}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 1, {1, 2}, {"a"}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, 2, {1, 2, 3}), ValidationError);
  EmbeddingMatrix ok(2, 1, {1, 2});
  CHECK(ok.row_ids() == std::vector<std::string>{"0", "1"});
}

TEST_CASE("zero-norm row named in the error") {
  try {
    EmbeddingMatrix(3, 2, {1, 0, 0, 0, 1, 1}, {"a", "b", "c"});
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
}

TEST_CASE("orthonormal basis") {
  EmbeddingMatrix m(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const std::size_t q[] = {0};
  const auto nn = knn_query(m, q, 2);
  REQUIRE(nn.size() == 1);
  REQUIRE(nn[0].size() == 2);
  CHECK(nn[0][0] == Neighbor{1, 0.0f});
  CHECK(nn[0][1] == Neighbor{2, 0.0f});
}

TEST_CASE("duplicated row is the top neighbour") {
  EmbeddingMatrix m(4, 3, {1, 2, 3, 0, 1, 0, 1, 2, 3, -1, 0, 0});
  const std::size_t q[] = {0, 2};
  const auto nn = knn_query(m, q, 1);
  CHECK(nn[0][0].index == 2);
  CHECK(nn[0][0].similarity == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(nn[1][0].index == 0);
}

TEST_CASE("ties go to the lower index") {
  EmbeddingMatrix m(5, 2, {1, 0, 0, 1, 0, 1, 0, 1, 0, 1});
  const auto nn = knn_all(m, 3);
  CHECK(nn[0][0].index == 1);
  CHECK(nn[0][1].index == 2);
  CHECK(nn[0][2].index == 3);
  CHECK(nn[4][0].index == 1);
}

TEST_CASE("200 random unit vectors against a brute-force oracle") {
  Rng rng(77);
  const std::size_t n = 200, d = 16, k = 10;
  std::vector<float> x(n * d);
  for (auto& v : x) v = static_cast<float>(rng.normal());
  EmbeddingMatrix m(n, d, x);
  const auto got = knn_all(m, k);
  const auto want = brute_knn(x, n, d, k);
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(got[i].size() == k);
    std::vector<std::uint32_t> idx;
    for (const auto& nb : got[i]) {
      idx.push_back(nb.index);
      CHECK(nb.similarity >= -1.0f);
      CHECK(nb.similarity <= 1.0f);
    }
    CHECK(idx == want[i]);
    for (std::size_t r = 1; r < k; ++r) CHECK(got[i][r - 1].similarity >= got[i][r].similarity);
  }
}

TEST_CASE("cosine properties and scale invariance") {
  Rng rng(3);
  const std::size_t n = 60, d = 8;
  std::vector<float> x(n * d), scaled(n * d);
  for (auto& v : x) v = static_cast<float>(rng.normal());
  for (std::size_t i = 0; i < n; ++i) {
    const float s = static_cast<float>(0.01 + 100.0 * rng.uniform());
    for (std::size_t j = 0; j < d; ++j) scaled[i * d + j] = x[i * d + j] * s;
  }
  EmbeddingMatrix a(n, d, x), b(n, d, scaled);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(cosine(a, i, i) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(cosine(a, i, i + 1) - cosine(a, i + 1, i)) <= 1e-6);
  }
  const auto na = knn_all(a, 5), nb = knn_all(b, 5);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::uint32_t> sa, sb;
    for (const auto& e : na[i]) sa.insert(e.index);
    for (const auto& e : nb[i]) sb.insert(e.index);
    CHECK(sa == sb);
  }
}

TEST_CASE("k bounds") {
  EmbeddingMatrix m(3, 2, {1, 0, 0, 1, 1, 1});
  CHECK_THROWS_AS(knn_all(m, 0), RangeError);
  CHECK_THROWS_AS(knn_all(m, 3), RangeError);
  CHECK_NOTHROW(knn_all(m, 2));
  const std::size_t bad[] = {3};
  CHECK_THROWS_AS(knn_query(m, bad, 1), RangeError);
}

TEST_CASE("probability containers") {
  test::TempDir dir("probs");
  DenseMatrix p{2, 3, {0.2f, 0.3f, 0.5f, 1.0f, 0.0f, 0.0f}, {"x", "y"}};
  write_probs(p, dir / "p.adcp");
  const auto back = read_probs(dir / "p.adcp");
  CHECK(back.data == p.data);
  CHECK(back.row_ids == p.row_ids);
  DenseMatrix bad{1, 2, {0.5f, 0.6f}, {}};
  CHECK_THROWS_AS(validate_probs(bad), ValidationError);
  DenseMatrix negative{1, 2, {1.5f, -0.5f}, {}};
  CHECK_THROWS_AS(validate_probs(negative), ValidationError);
  CHECK_THROWS_AS(write_probs(bad, dir / "bad.adcp"), ValidationError);
  CHECK_THROWS_AS(read_embeddings(dir / "p.adcp"), FormatError);
}

TEST_CASE("missing sidecar gives index ids; mismatched sidecar is an error") {
  test::TempDir dir("sidecar");
  EmbeddingMatrix m(2, 1, {1, 2}, {"a", "b"});
  write_embeddings(m, dir / "e.adce");
  std::filesystem::remove(sidecar_path(dir / "e.adce"));
  CHECK(read_embeddings(dir / "e.adce").row_ids() == std::vector<std::string>{"0", "1"});
  write_file_atomic(sidecar_path(dir / "e.adce"), "only-one\n");
  CHECK_THROWS(read_embeddings(dir / "e.adce"));
  CHECK_THROWS_AS(read_embeddings(dir / "absent.adce"), IoError);
}
