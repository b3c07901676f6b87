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

#include "adc/content.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "adc/common.hpp"
#include "adc/hashing.hpp"

namespace adc {
namespace {

bool starts_with(std::span<const std::uint8_t> b, std::initializer_list<std::uint8_t> magic) {
  if (b.size() < magic.size()) return false;
  return std::equal(magic.begin(), magic.end(), b.begin());
}

bool ends_with(std::span<const std::uint8_t> b, std::initializer_list<std::uint8_t> tail) {
  if (b.size() < tail.size()) return false;
  return std::equal(tail.begin(), tail.end(), b.end() - static_cast<std::ptrdiff_t>(tail.size()));
}

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

std::string_view to_string(ImageKind k) {
  switch (k) {
    case ImageKind::kJpeg: return "jpeg";
    case ImageKind::kPng: return "png";
    case ImageKind::kGif: return "gif";
    case ImageKind::kWebp: return "webp";
    case ImageKind::kBmp: return "bmp";
    case ImageKind::kUnknown: break;
  }
  return "unknown";
}

SniffResult sniff_image(std::span<const std::uint8_t> b) {
  SniffResult r;
  if (starts_with(b, {0xFF, 0xD8, 0xFF})) {
    r.kind = ImageKind::kJpeg;
    // Trailing padding after EOI is common; allow a few bytes of slack.
    const auto tail = b.subspan(b.size() > 16 ? b.size() - 16 : 0);
    for (std::size_t i = 0; i + 1 < tail.size(); ++i)
      if (tail[i] == 0xFF && tail[i + 1] == 0xD9) r.complete = true;
  } else if (starts_with(b, {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) {
    r.kind = ImageKind::kPng;
    r.complete = ends_with(b, {'I', 'E', 'N', 'D', 0xAE, 0x42, 0x60, 0x82});
  } else if (starts_with(b, {'G', 'I', 'F', '8', '7', 'a'}) ||
             starts_with(b, {'G', 'I', 'F', '8', '9', 'a'})) {
    r.kind = ImageKind::kGif;
    r.complete = ends_with(b, {0x3B});
  } else if (b.size() >= 12 && starts_with(b, {'R', 'I', 'F', 'F'}) &&
             std::memcmp(b.data() + 8, "WEBP", 4) == 0) {
    r.kind = ImageKind::kWebp;
    r.complete = static_cast<std::uint64_t>(le32(b.data() + 4)) + 8 <= b.size();
  } else if (b.size() >= 6 && starts_with(b, {'B', 'M'})) {
    r.kind = ImageKind::kBmp;
    r.complete = le32(b.data() + 2) <= b.size();
  }
  return r;
}

std::filesystem::path ContentStore::path_for(std::string_view hash) const {
  if (hash.size() < 2) throw ValidationError("ContentStore: bad hash");
  return root_ / std::string(hash.substr(0, 2)) / std::string(hash);
}

bool ContentStore::contains(std::string_view hash) const {
  return std::filesystem::exists(path_for(hash));
}

std::string ContentStore::put(std::span<const std::uint8_t> bytes) const {
  std::string hash = sha256_hex(bytes);
  const auto p = path_for(hash);
  if (!std::filesystem::exists(p)) {
    write_file_atomic(p, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return hash;
}

std::optional<std::vector<std::uint8_t>> ContentStore::get(std::string_view hash) const {
  const auto p = path_for(hash);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return read_bytes(p);
}

}  // namespace adc
