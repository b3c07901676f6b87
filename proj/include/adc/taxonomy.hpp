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
#include <string>
#include <vector>

#include "adc/common.hpp"
#include "adc/prompt_client.hpp"

namespace adc {

struct AttributeSet {
  std::string name;
  std::vector<std::string> options;
};

struct ClassSpec {
  std::string name;
  std::vector<AttributeSet> attributes;
};

/// Dataset design: classes, their attributes, and the option values that
/// span the subclass grid.
struct TaxonomySpec {
  std::string version;
  std::vector<ClassSpec> classes;
};

/// One cell of the subclass grid: a class plus one option per attribute.
struct SubclassKey {
  std::int32_t class_index = 0;
  std::vector<std::int32_t> option_indices;

  friend auto operator<=>(const SubclassKey&, const SubclassKey&) = default;
  friend bool operator==(const SubclassKey&, const SubclassKey&) = default;
};

struct Query {
  SubclassKey key;
  std::string text;
};

struct Violation {
  std::string path;
  std::string message;
};

/// Lists every invariant violation; empty iff the spec is valid.
std::vector<Violation> validate_taxonomy(const TaxonomySpec& spec);

/// Throws ValidationError summarising validate_taxonomy() if non-empty.
void require_valid(const TaxonomySpec& spec);

/// One query per subclass key, options joined in declared attribute order
/// followed by the class name. Ordered lexicographically by key.
std::vector<Query> generate_queries(const TaxonomySpec& spec);

/// Σ_classes Π_attributes |options|, without materialising the queries.
std::uint64_t count_subclasses(const TaxonomySpec& spec);

// Spec file (JSON key/value tree). See docs/taxonomy_format.md.
TaxonomySpec parse_taxonomy(std::string_view json_text);
TaxonomySpec load_taxonomy(const std::filesystem::path& path);
std::string serialize_taxonomy(const TaxonomySpec& spec);

/// Raised when a completion yields fewer distinct options than requested.
class InsufficientOptionsError : public Error {
 public:
  InsufficientOptionsError(std::string what, std::vector<std::string> parsed)
      : Error(std::move(what)), parsed_(std::move(parsed)) {}
  const std::vector<std::string>& parsed() const { return parsed_; }

 private:
  std::vector<std::string> parsed_;
};

struct OptionRange {
  std::size_t min = 30;
  std::size_t max = 80;
};

std::string build_attribute_prompt(std::string_view class_name, std::string_view attribute,
                                   OptionRange range);

/// Splits a completion into normalized, deduplicated option strings.
/// List markers ("1.", "-", "*") are stripped.
std::vector<std::string> parse_option_list(std::string_view response);

/// Asks the client for option strings describing `attribute` of `class_name`.
/// `feedback` is appended to the prompt for refinement rounds. The exchange
/// is recorded to `log` when provided.
std::vector<std::string> expand_attributes(const TaxonomySpec& spec, std::string_view class_name,
                                           std::string_view attribute, OptionRange range,
                                           PromptClient& client, PromptLog* log = nullptr,
                                           std::string_view feedback = {});

}  // namespace adc
