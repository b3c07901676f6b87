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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adc {

enum class ImageKind { kUnknown, kJpeg, kPng, kGif, kWebp, kBmp };

std::string_view to_string(ImageKind k);

struct SniffResult {
  ImageKind kind = ImageKind::kUnknown;
  bool complete = false;  // trailer present (JPEG EOI, PNG IEND, GIF ';', RIFF size)
  bool ok() const { return kind != ImageKind::kUnknown && complete; }
};

/// Magic-byte and trailer check. Does not decode pixels.
SniffResult sniff_image(std::span<const std::uint8_t> bytes);

/// Content-addressed blob store: <root>/<hash[0:2]>/<hash>.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(std::string_view hash) const;
  bool contains(std::string_view hash) const;
  /// Writes bytes under their hash (idempotent) and returns the hash.
  std::string put(std::span<const std::uint8_t> bytes) const;
  std::optional<std::vector<std::uint8_t>> get(std::string_view hash) const;

 private:
  std::filesystem::path root_;
};

}  // namespace adc
