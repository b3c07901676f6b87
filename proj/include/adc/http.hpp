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

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace adc {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Blocking GET. Connection-level failures throw TransportError; HTTP error
/// statuses are returned to the caller.
HttpResponse http_get(const std::string& url, const HttpHeaders& headers = {},
                      std::chrono::seconds timeout = std::chrono::seconds(30));

HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::string& content_type, const HttpHeaders& headers = {},
                       std::chrono::seconds timeout = std::chrono::seconds(60));

std::string url_encode(std::string_view s);

}  // namespace adc
