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

#include <cstddef>
#include <string_view>
#include <vector>

// Inner-loop float kernels for similarity search. Each ISA variant lives in
// its own translation unit compiled with the matching target flags; the
// dispatcher picks one at first use from CPU features, overridable with
// ADC_SIMD=scalar|avx2|neon.

namespace adc::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  float (*dot)(const float* a, const float* b, std::size_t n);
  float (*l2sq)(const float* a, std::size_t n);
  /// out[r] = dot(query, rows + r*dim) for r in [0, n_rows).
  void (*dot_rows)(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   float* out);
};

/// Table selected for this process.
const KernelTable& active();

/// ISAs compiled in and supported by this CPU; always contains kScalar.
std::vector<Isa> available();

/// Throws adc::RangeError if `isa` is not available.
const KernelTable& table_for(Isa isa);

namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
              float* out);
}  // namespace scalar

namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
              float* out);
}  // namespace avx2

namespace neon {
float dot(const float* a, const float* b, std::size_t n);
float l2sq(const float* a, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
              float* out);
}  // namespace neon

}  // namespace adc::simd
