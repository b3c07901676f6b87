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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adc {

using ClassIndex = std::int32_t;

// Error hierarchy. Every failure the library reports is an adc::Error so
// the CLI can map it to a diagnostic and a non-zero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Failure talking to an external service. Callers may retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Deterministic 64-bit generator with platform-independent derived draws.
/// std::uniform_int_distribution and std::shuffle are implementation-defined,
/// so seeded artifacts would differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1).
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

/// Derives a stage seed from a root seed and a label ("collect", "split", ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// String helpers.
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
/// Trim, collapse internal whitespace runs to one space, lowercase.
std::string normalize_option(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
/// Filesystem-safe slug: lowercase alphanumerics, other runs become '-'.
std::string slugify(std::string_view s);

// File helpers.
std::string read_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

std::string hex_encode(std::span<const std::uint8_t> bytes);

}  // namespace adc
