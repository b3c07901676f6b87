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

#include "adc/prompt_client.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "adc/common.hpp"
#include "adc/http.hpp"

namespace adc {

std::string CannedPromptClient::complete(std::string_view prompt) {
  if (auto it = responses_.find(prompt); it != responses_.end()) return it->second;
  if (has_fallback_) return fallback_;
  throw TransportError("canned client has no response for prompt: " + std::string(prompt));
}

void PromptLog::record(std::string_view prompt, std::string_view response) {
  std::lock_guard lock(mu_);
  entries_.push_back({std::string(prompt), std::string(response)});
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to prompt log " + path_.string());
  nlohmann::ordered_json j;
  j["prompt"] = prompt;
  j["response"] = response;
  out << j.dump() << '\n';
}

std::vector<PromptExchange> PromptLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<PromptExchange> PromptLog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt log " + path.string());
  std::vector<PromptExchange> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("prompt") || !j.contains("response")) {
      throw FormatError("malformed prompt log line in " + path.string());
    }
    out.push_back({j["prompt"].get<std::string>(), j["response"].get<std::string>()});
  }
  return out;
}

ReplayPromptClient::ReplayPromptClient(const std::vector<PromptExchange>& exchanges) {
  // Later recordings of the same prompt win, matching the latest refinement round.
  for (const auto& e : exchanges) responses_[e.prompt] = e.response;
}

std::string ReplayPromptClient::complete(std::string_view prompt) {
  if (auto it = responses_.find(prompt); it != responses_.end()) return it->second;
  throw TransportError("no recorded response for prompt: " + std::string(prompt));
}

HttpPromptClient::HttpPromptClient(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

HttpPromptClient HttpPromptClient::from_env() {
  const char* endpoint = std::getenv("ADC_PROMPT_ENDPOINT");
  const char* key = std::getenv("ADC_PROMPT_KEY");
  if (!endpoint || !*endpoint) throw ValidationError("ADC_PROMPT_ENDPOINT is not set");
  return HttpPromptClient(endpoint, key ? key : "");
}

std::string HttpPromptClient::complete(std::string_view prompt) {
  nlohmann::json req;
  req["prompt"] = prompt;
  HttpHeaders headers;
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  const auto res = http_post(endpoint_, req.dump(), "application/json", headers);
  if (res.status >= 500 || res.status == 429) {
    throw TransportError("prompt endpoint returned HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    throw Error("prompt endpoint returned HTTP " + std::to_string(res.status));
  }
  const auto j = nlohmann::json::parse(res.body, nullptr, false);
  if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) {
    throw TransportError("prompt endpoint reply lacks a \"text\" field");
  }
  return j["text"].get<std::string>();
}

}  // namespace adc
