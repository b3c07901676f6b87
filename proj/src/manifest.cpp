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

#include "adc/manifest.hpp"

#include <json.hpp>
#include <sstream>
#include <unordered_set>

namespace adc {
namespace {

constexpr std::string_view kManifestKind = "adc-manifest";
constexpr int kManifestVersion = 1;

using ojson = nlohmann::ordered_json;

ojson header_json(const ManifestHeader& h) {
  ojson j;
  j["kind"] = kManifestKind;
  j["version"] = kManifestVersion;
  j["taxonomy_version"] = h.taxonomy_version;
  j["seed"] = h.seed;
  return j;
}

bool is_header(const nlohmann::json& j) {
  return j.is_object() && j.contains("kind") && j["kind"] == kManifestKind;
}

}  // namespace

std::string_view to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::kPending: return "pending";
    case FetchStatus::kFetched: return "fetched";
    case FetchStatus::kBroken: return "broken";
    case FetchStatus::kMalformed: return "malformed";
    case FetchStatus::kDuplicate: return "duplicate";
  }
  return "pending";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kNone: return "none";
    case Split::kTrain: return "train";
    case Split::kEval: return "eval";
    case Split::kTest: return "test";
  }
  return "none";
}

FetchStatus parse_fetch_status(std::string_view s) {
  if (s == "pending") return FetchStatus::kPending;
  if (s == "fetched") return FetchStatus::kFetched;
  if (s == "broken") return FetchStatus::kBroken;
  if (s == "malformed") return FetchStatus::kMalformed;
  if (s == "duplicate") return FetchStatus::kDuplicate;
  throw FormatError("unknown fetch status '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "none") return Split::kNone;
  if (s == "train") return Split::kTrain;
  if (s == "eval") return Split::kEval;
  if (s == "test") return Split::kTest;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

const SampleRecord* Manifest::find(std::string_view sample_id) const {
  auto idx = index_of(sample_id);
  return idx ? &records_[*idx] : nullptr;
}

std::optional<std::size_t> Manifest::index_of(std::string_view sample_id) const {
  auto it = index_.find(std::string(sample_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Manifest::upsert(SampleRecord record) {
  auto it = index_.find(record.sample_id);
  if (it != index_.end()) {
    records_[it->second] = std::move(record);
    return false;
  }
  index_.emplace(record.sample_id, records_.size());
  records_.push_back(std::move(record));
  return true;
}

void Manifest::set(std::size_t index, SampleRecord record) {
  if (index >= records_.size()) throw RangeError("Manifest::set: index out of range");
  if (records_[index].sample_id != record.sample_id)
    throw ValidationError("Manifest::set: sample_id mismatch");
  records_[index] = std::move(record);
}

std::array<std::size_t, kFetchStatusCount> Manifest::status_counts() const {
  std::array<std::size_t, kFetchStatusCount> c{};
  for (const auto& r : records_) ++c[static_cast<std::size_t>(r.status)];
  return c;
}

std::vector<const SampleRecord*> Manifest::fetched() const {
  std::vector<const SampleRecord*> out;
  for (const auto& r : records_)
    if (r.status == FetchStatus::kFetched) out.push_back(&r);
  return out;
}

void Manifest::check_invariants() const {
  std::unordered_set<std::string> ids, hashes;
  for (const auto& r : records_) {
    if (r.sample_id.empty()) throw ValidationError("manifest: empty sample_id");
    if (!ids.insert(r.sample_id).second)
      throw ValidationError("manifest: duplicate sample_id " + r.sample_id);
    if (r.webly_label != r.key.class_index)
      throw ValidationError("manifest: webly_label differs from subclass class for " + r.sample_id);
    if (r.status == FetchStatus::kFetched) {
      if (r.content_hash.empty())
        throw ValidationError("manifest: fetched record without content hash " + r.sample_id);
      if (!hashes.insert(r.content_hash).second)
        throw ValidationError("manifest: two fetched records share content " + r.content_hash);
    }
  }
}

std::string serialize_record(const SampleRecord& r) {
  ojson j;
  j["sample_id"] = r.sample_id;
  j["class_index"] = r.key.class_index;
  j["option_indices"] = r.key.option_indices;
  j["webly_label"] = r.webly_label;
  j["query"] = r.query;
  j["uri"] = r.uri;
  j["content_hash"] = r.content_hash;
  j["byte_size"] = r.byte_size;
  j["status"] = to_string(r.status);
  j["split"] = to_string(r.split);
  j["clean_candidate"] = r.clean_candidate;
  return j.dump();
}

SampleRecord parse_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("manifest: malformed record line");
  try {
    SampleRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.key.class_index = j.at("class_index").get<std::int32_t>();
    r.key.option_indices = j.at("option_indices").get<std::vector<std::int32_t>>();
    r.webly_label = j.at("webly_label").get<ClassIndex>();
    r.query = j.at("query").get<std::string>();
    r.uri = j.at("uri").get<std::string>();
    r.content_hash = j.at("content_hash").get<std::string>();
    r.byte_size = j.at("byte_size").get<std::uint64_t>();
    r.status = parse_fetch_status(j.at("status").get<std::string>());
    r.split = parse_split(j.at("split").get<std::string>());
    r.clean_candidate = j.at("clean_candidate").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

std::string serialize_manifest(const Manifest& m) {
  std::string out = header_json(m.header()).dump();
  out.push_back('\n');
  for (const auto& r : m.records()) {
    out += serialize_record(r);
    out.push_back('\n');
  }
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  bool seen_header = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    if (!seen_header) {
      const auto j = nlohmann::json::parse(raw, nullptr, false);
      if (!is_header(j)) throw FormatError("manifest: missing header line");
      if (j.value("version", 0) != kManifestVersion)
        throw FormatError("manifest: unsupported version");
      m.header().taxonomy_version = j.value("taxonomy_version", std::string{});
      m.header().seed = j.value("seed", std::uint64_t{0});
      seen_header = true;
      continue;
    }
    try {
      m.upsert(parse_record(raw));
    } catch (const FormatError& e) {
      throw FormatError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  if (!seen_header) throw FormatError("manifest: empty file");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_manifest(m));
}

ManifestWriter::ManifestWriter(const std::filesystem::path& path, const ManifestHeader& header)
    : path_(path) {
  const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw IoError("cannot open manifest for append: " + path.string());
  if (!exists) {
    out_ << header_json(header).dump() << '\n';
    out_.flush();
  }
}

void ManifestWriter::append(const SampleRecord& r) {
  std::lock_guard lock(mu_);
  out_ << serialize_record(r) << '\n';
  if (!out_) throw IoError("manifest write failed: " + path_.string());
}

void ManifestWriter::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
  if (!out_) throw IoError("manifest flush failed: " + path_.string());
}

}  // namespace adc
