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
#include <cmath>

#include "adc/common.hpp"
#include "adc/simd/kernels.hpp"

using namespace adc;

namespace {

std::vector<float> randoms(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

double ref_dot(const float* a, const float* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += double(a[i]) * b[i];
  return s;
}

}  // namespace

TEST_CASE("scalar is always available") {
  const auto isas = simd::available();
  CHECK(std::find(isas.begin(), isas.end(), simd::Isa::kScalar) != isas.end());
  CHECK(simd::table_for(simd::Isa::kScalar).isa == simd::Isa::kScalar);
  MESSAGE("active kernels: " << simd::to_string(simd::active().isa));
}

TEST_CASE("every available variant matches the scalar reference") {
  const auto& ref = simd::table_for(simd::Isa::kScalar);
  for (const auto isa : simd::available()) {
    CAPTURE(simd::to_string(isa));
    const auto& t = simd::table_for(isa);
    // odd lengths exercise the tails
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 512u, 1001u}) {
      const auto a = randoms(n, 10 + n), b = randoms(n, 20 + n);
      const double exact = ref_dot(a.data(), b.data(), n);
      const double mag = std::sqrt(ref_dot(a.data(), a.data(), n) * ref_dot(b.data(), b.data(), n)) + 1.0;
      CHECK(std::abs(t.dot(a.data(), b.data(), n) - exact) <= 1e-5 * mag);
      CHECK(std::abs(t.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-5 * mag);
      const double l2 = ref_dot(a.data(), a.data(), n);
      CHECK(std::abs(t.l2sq(a.data(), n) - l2) <= 1e-5 * (l2 + 1.0));
    }
    for (std::size_t dim : {1u, 5u, 8u, 13u, 64u, 129u}) {
      const std::size_t rows = 37;
      const auto q = randoms(dim, dim), m = randoms(rows * dim, dim + 1);
      std::vector<float> out(rows), want(rows);
      t.dot_rows(q.data(), m.data(), rows, dim, out.data());
      ref.dot_rows(q.data(), m.data(), rows, dim, want.data());
      for (std::size_t r = 0; r < rows; ++r) {
        const double exact = ref_dot(q.data(), m.data() + r * dim, dim);
        CHECK(std::abs(out[r] - want[r]) <= 1e-4 * (std::abs(exact) + std::sqrt(double(dim))));
      }
    }
  }
}

TEST_CASE("unknown variant is a range error") {
  const auto isas = simd::available();
  for (const auto isa : {simd::Isa::kAvx2, simd::Isa::kNeon})
    if (std::find(isas.begin(), isas.end(), isa) == isas.end()) CHECK_THROWS_AS(simd::table_for(isa), RangeError);
}
