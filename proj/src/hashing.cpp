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

#include "adc/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "adc/common.hpp"

namespace adc {
namespace {

std::array<std::uint8_t, 32> sha256_raw(const void* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1 || len != digest.size()) {
    throw Error("sha256: OpenSSL digest failure");
  }
  return digest;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  const auto d = sha256_raw(bytes.data(), bytes.size());
  return hex_encode(d);
}

std::string sha256_hex(std::string_view text) {
  const auto d = sha256_raw(text.data(), text.size());
  return hex_encode(d);
}

std::string make_sample_id(std::string_view query, std::string_view uri) {
  std::string key;
  key.reserve(query.size() + uri.size() + 1);
  key.append(query).push_back('\n');
  key.append(uri);
  const auto d = sha256_raw(key.data(), key.size());
  return hex_encode(std::span<const std::uint8_t>(d.data(), 16));
}

}  // namespace adc
