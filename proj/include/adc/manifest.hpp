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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adc/common.hpp"
#include "adc/taxonomy.hpp"

namespace adc {

enum class FetchStatus { kPending, kFetched, kBroken, kMalformed, kDuplicate };
enum class Split { kNone, kTrain, kEval, kTest };

inline constexpr std::size_t kFetchStatusCount = 5;

std::string_view to_string(FetchStatus s);
std::string_view to_string(Split s);
FetchStatus parse_fetch_status(std::string_view s);
Split parse_split(std::string_view s);

/// One collected sample: provenance, webly label, content identity, split.
struct SampleRecord {
  std::string sample_id;
  SubclassKey key;
  ClassIndex webly_label = 0;
  std::string query;
  std::string uri;
  std::string content_hash;  // hex SHA-256, empty until fetched
  std::uint64_t byte_size = 0;
  FetchStatus status = FetchStatus::kPending;
  Split split = Split::kNone;
  bool clean_candidate = false;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct ManifestHeader {
  std::string taxonomy_version;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestHeader&, const ManifestHeader&) = default;
};

/// Ordered sample records. Re-inserting an existing sample_id replaces the
/// record in place, which is how the append-only file is folded on load.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(ManifestHeader header) : header_(std::move(header)) {}

  const ManifestHeader& header() const { return header_; }
  ManifestHeader& header() { return header_; }

  const std::vector<SampleRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const SampleRecord* find(std::string_view sample_id) const;
  std::optional<std::size_t> index_of(std::string_view sample_id) const;

  /// Inserts or replaces by sample_id. Returns true if the record was new.
  bool upsert(SampleRecord record);
  /// Replaces the record at `index` (sample_id must not change).
  void set(std::size_t index, SampleRecord record);

  std::array<std::size_t, kFetchStatusCount> status_counts() const;
  std::size_t count(FetchStatus s) const { return status_counts()[static_cast<std::size_t>(s)]; }

  /// Records with status fetched, in manifest order.
  std::vector<const SampleRecord*> fetched() const;

  /// Throws ValidationError on broken invariants (unique ids, fetched
  /// implies hash, webly label matches key, unique fetched hashes).
  void check_invariants() const;

 private:
  ManifestHeader header_;
  std::vector<SampleRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string serialize_record(const SampleRecord& r);
SampleRecord parse_record(std::string_view line);

std::string serialize_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);

Manifest load_manifest(const std::filesystem::path& path);
/// Rewrites the file with one line per record (compaction).
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Single-writer append log. Creates the file with a header if missing.
class ManifestWriter {
 public:
  ManifestWriter(const std::filesystem::path& path, const ManifestHeader& header);
  void append(const SampleRecord& r);
  void flush();

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace adc
