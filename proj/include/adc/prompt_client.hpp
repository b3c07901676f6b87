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

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace adc {

/// Send a prompt, receive text. Implementations must be safe to call from
/// several threads.
class PromptClient {
 public:
  virtual ~PromptClient() = default;
  /// Throws TransportError on failure.
  virtual std::string complete(std::string_view prompt) = 0;
};

/// Returns fixed responses. A prompt without an exact entry gets the
/// fallback response, or TransportError when there is none.
class CannedPromptClient : public PromptClient {
 public:
  explicit CannedPromptClient(std::string fallback) : fallback_(std::move(fallback)), has_fallback_(true) {}
  explicit CannedPromptClient(std::map<std::string, std::string, std::less<>> responses)
      : responses_(std::move(responses)) {}

  std::string complete(std::string_view prompt) override;

 private:
  std::map<std::string, std::string, std::less<>> responses_;
  std::string fallback_;
  bool has_fallback_ = false;
};

struct PromptExchange {
  std::string prompt;
  std::string response;
};

/// Append-only audit trail of prompt/response pairs (JSON lines).
class PromptLog {
 public:
  PromptLog() = default;
  explicit PromptLog(std::filesystem::path path) : path_(std::move(path)) {}

  void record(std::string_view prompt, std::string_view response);
  std::vector<PromptExchange> entries() const;

  static std::vector<PromptExchange> load(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::filesystem::path path_;
  std::vector<PromptExchange> entries_;
};

/// Replays a recorded PromptLog; unknown prompts are a TransportError.
class ReplayPromptClient : public PromptClient {
 public:
  explicit ReplayPromptClient(const std::vector<PromptExchange>& exchanges);
  std::string complete(std::string_view prompt) override;

 private:
  std::map<std::string, std::string, std::less<>> responses_;
};

/// POSTs {"prompt": ...} as JSON to an HTTP endpoint and reads the "text"
/// field of the reply. Endpoint and bearer key come from ADC_PROMPT_ENDPOINT
/// and ADC_PROMPT_KEY unless given explicitly.
class HttpPromptClient : public PromptClient {
 public:
  HttpPromptClient(std::string endpoint, std::string api_key);
  static HttpPromptClient from_env();

  std::string complete(std::string_view prompt) override;

 private:
  std::string endpoint_;
  std::string api_key_;
};

}  // namespace adc
