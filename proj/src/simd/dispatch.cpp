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

#include <cstdlib>
#include <string>

#include "adc/common.hpp"
#include "adc/simd/kernels.hpp"

namespace adc::simd {
namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, &scalar::dot, &scalar::l2sq, &scalar::dot_rows};
#if defined(ADC_HAVE_AVX2_TU)
constexpr KernelTable kAvx2Table{Isa::kAvx2, &avx2::dot, &avx2::l2sq, &avx2::dot_rows};
#endif
#if defined(ADC_HAVE_NEON_TU)
constexpr KernelTable kNeonTable{Isa::kNeon, &neon::dot, &neon::l2sq, &neon::dot_rows};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(ADC_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(ADC_HAVE_NEON_TU)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() {
  if (const char* env = std::getenv("ADC_SIMD"); env && *env) {
    const std::string want = env;
    for (Isa isa : available())
      if (to_string(isa) == want) return table_for(isa);
  }
  const auto isas = available();
  return table_for(isas.back());
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "scalar";
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::kScalar};
  if (cpu_supports(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  if (cpu_supports(Isa::kNeon)) out.push_back(Isa::kNeon);
  return out;
}

const KernelTable& table_for(Isa isa) {
  if (!cpu_supports(isa))
    throw RangeError("SIMD variant '" + std::string(to_string(isa)) + "' not available");
  switch (isa) {
#if defined(ADC_HAVE_AVX2_TU)
    case Isa::kAvx2: return kAvx2Table;
#endif
#if defined(ADC_HAVE_NEON_TU)
    case Isa::kNeon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace adc::simd
