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

#include <algorithm>
#include <cstdlib>
#include <json.hpp>

#include "adc/collector.hpp"
#include "adc/http.hpp"

namespace adc {
namespace {

constexpr std::string_view kFileScheme = "file://";

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::vector<std::uint8_t> pseudo_random_bytes(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next() & 0xFF);
  return out;
}

}  // namespace

std::vector<std::uint8_t> synthesize_png(std::uint64_t seed, std::size_t body_bytes) {
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  // IHDR 1x1 greyscale; CRCs are not checked by the sniffer.
  append_be32(out, 13);
  out.insert(out.end(), {'I', 'H', 'D', 'R'});
  append_be32(out, 1);
  append_be32(out, 1);
  out.insert(out.end(), {8, 0, 0, 0, 0});
  append_be32(out, 0);
  const auto body = pseudo_random_bytes(seed, body_bytes);
  append_be32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), {'I', 'D', 'A', 'T'});
  out.insert(out.end(), body.begin(), body.end());
  append_be32(out, 0);
  append_be32(out, 0);
  out.insert(out.end(), {'I', 'E', 'N', 'D', 0xAE, 0x42, 0x60, 0x82});
  return out;
}

std::vector<std::uint8_t> synthesize_jpeg(std::uint64_t seed, std::size_t body_bytes) {
  std::vector<std::uint8_t> out = {0xFF, 0xD8, 0xFF, 0xE0};
  auto body = pseudo_random_bytes(seed, body_bytes);
  // Keep the body free of accidental EOI markers.
  for (auto& b : body)
    if (b == 0xFF) b = 0xFE;
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), {0xFF, 0xD9});
  return out;
}

Download SearchBackend::fetch(std::string_view uri) {
  Download d;
  if (uri.starts_with(kFileScheme)) {
    const std::filesystem::path p(std::string(uri.substr(kFileScheme.size())));
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) return d;  // broken
    d.bytes = read_bytes(p);
    d.status = DownloadStatus::kOk;
    return d;
  }
  if (uri.starts_with("http://") || uri.starts_with("https://")) {
    const auto res = http_get(std::string(uri));
    if (res.status == 429 || res.status >= 500) {
      throw TransportError("HTTP " + std::to_string(res.status) + " for " + std::string(uri));
    }
    if (res.status != 200) return d;
    d.status = DownloadStatus::kOk;
    d.bytes.assign(res.body.begin(), res.body.end());
    return d;
  }
  return d;
}

double MockBackend::unit_draw(std::uint64_t seed, std::string_view uri) {
  return static_cast<double>(splitmix64(seed ^ fnv1a64(uri)) >> 11) * 0x1.0p-53;
}

BackendInfo MockBackend::info() const {
  return {"mock", options_.results_per_query, 0.0};
}

std::vector<std::string> MockBackend::search(std::string_view query, std::size_t limit) {
  const std::size_t n = std::min(limit, options_.results_per_query);
  const std::string slug = slugify(query);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back("mock://" + slug + "/" + std::to_string(i));
  return out;
}

Download MockBackend::fetch(std::string_view uri) {
  const std::string key(uri);
  {
    std::lock_guard lock(mu_);
    ++fetch_calls_;
    const int attempt = ++attempts_[key];
    if (attempt == 1 && options_.transient_rate > 0.0 &&
        unit_draw(options_.seed ^ 0x7472616E7369656EULL, uri) < options_.transient_rate) {
      throw TransportError("mock transient failure for " + key);
    }
  }
  const double r = unit_draw(options_.seed, uri);
  Download d;
  double band = options_.broken_rate;
  if (r < band) return d;
  d.status = DownloadStatus::kOk;
  const std::uint64_t content_seed = splitmix64(options_.seed ^ fnv1a64(uri) ^ 0xC0FFEEULL);
  if (r < (band += options_.malformed_rate)) {
    d.bytes = synthesize_png(content_seed);
    d.bytes.resize(d.bytes.size() / 2);
    return d;
  }
  if (r < (band += options_.duplicate_rate)) {
    // Eight shared payloads.
    d.bytes = synthesize_png(splitmix64(options_.seed ^ (fnv1a64(uri) % 8)));
    return d;
  }
  d.bytes = synthesize_png(content_seed);
  return d;
}

std::size_t MockBackend::fetch_calls() const {
  std::lock_guard lock(mu_);
  return fetch_calls_;
}

BackendInfo LocalCorpusBackend::info() const { return {"local", SIZE_MAX, 0.0}; }

std::vector<std::string> LocalCorpusBackend::search(std::string_view query, std::size_t limit) {
  const auto dir = root_ / slugify(query);
  std::vector<std::string> files;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return {};
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(std::filesystem::absolute(e.path()).string());
  }
  std::sort(files.begin(), files.end());
  if (files.size() > limit) files.resize(limit);
  for (auto& f : files) f = std::string(kFileScheme) + f;
  return files;
}

HttpSearchBackend::HttpSearchBackend(std::string endpoint, std::string api_key,
                                     double requests_per_second)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), rps_(requests_per_second) {}

std::unique_ptr<HttpSearchBackend> HttpSearchBackend::from_env() {
  const char* endpoint = std::getenv("ADC_SEARCH_ENDPOINT");
  const char* key = std::getenv("ADC_SEARCH_KEY");
  if (!endpoint || !*endpoint) throw ValidationError("ADC_SEARCH_ENDPOINT is not set");
  return std::make_unique<HttpSearchBackend>(endpoint, key ? key : "");
}

BackendInfo HttpSearchBackend::info() const { return {"http", 150, rps_}; }

std::vector<std::string> HttpSearchBackend::search(std::string_view query, std::size_t limit) {
  const std::string sep = endpoint_.find('?') == std::string::npos ? "?" : "&";
  const std::string url =
      endpoint_ + sep + "q=" + url_encode(query) + "&count=" + std::to_string(limit);
  HttpHeaders headers;
  if (!api_key_.empty()) headers.emplace_back("Ocp-Apim-Subscription-Key", api_key_);
  const auto res = http_get(url, headers);
  if (res.status == 429 || res.status >= 500)
    throw TransportError("search HTTP " + std::to_string(res.status));
  if (res.status != 200) throw Error("search HTTP " + std::to_string(res.status));

  const auto j = nlohmann::json::parse(res.body, nullptr, false);
  if (j.is_discarded()) throw TransportError("search reply is not JSON");
  std::vector<std::string> out;
  auto collect = [&](const char* array_key, const char* url_key) {
    if (!j.contains(array_key) || !j[array_key].is_array()) return;
    for (const auto& item : j[array_key]) {
      if (out.size() >= limit) break;
      if (item.contains(url_key) && item[url_key].is_string())
        out.push_back(item[url_key].get<std::string>());
    }
  };
  collect("value", "contentUrl");
  collect("items", "link");
  return out;
}

std::unique_ptr<SearchBackend> make_backend(std::string_view name,
                                            const std::filesystem::path& corpus_root,
                                            const MockOptions& mock) {
  if (name == "mock") return std::make_unique<MockBackend>(mock);
  if (name == "local") {
    if (corpus_root.empty()) throw ValidationError("local backend needs a corpus directory");
    return std::make_unique<LocalCorpusBackend>(corpus_root);
  }
  if (name == "http") return HttpSearchBackend::from_env();
  throw ValidationError("unknown backend '" + std::string(name) + "' (mock|local|http)");
}

}  // namespace adc
