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

#include "adc/taxonomy.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

namespace adc {

std::vector<Violation> validate_taxonomy(const TaxonomySpec& spec) {
  std::vector<Violation> out;
  if (spec.classes.empty()) {
    out.push_back({"classes", "class list is empty"});
    return out;
  }
  std::set<std::string, std::less<>> class_names;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cls = spec.classes[c];
    const std::string cpath = "classes[" + std::to_string(c) + "]";
    if (cls.name.empty()) out.push_back({cpath + ".name", "class name is empty"});
    else if (!class_names.insert(cls.name).second)
      out.push_back({cpath + ".name", "duplicate class name '" + cls.name + "'"});
    if (cls.attributes.empty()) {
      out.push_back({cpath + ".attributes", "class '" + cls.name + "' has no attributes"});
      continue;
    }
    std::set<std::string, std::less<>> attr_names;
    for (std::size_t a = 0; a < cls.attributes.size(); ++a) {
      const auto& attr = cls.attributes[a];
      const std::string apath = cpath + ".attributes[" + std::to_string(a) + "]";
      if (attr.name.empty()) out.push_back({apath + ".name", "attribute name is empty"});
      else if (!attr_names.insert(attr.name).second)
        out.push_back({apath + ".name", "duplicate attribute name '" + attr.name + "'"});
      if (attr.options.empty()) {
        out.push_back({apath + ".options", "attribute '" + attr.name + "' has no options"});
        continue;
      }
      std::set<std::string, std::less<>> opts;
      for (std::size_t o = 0; o < attr.options.size(); ++o) {
        const auto& opt = attr.options[o];
        const std::string opath = apath + ".options[" + std::to_string(o) + "]";
        if (trim(opt).empty()) out.push_back({opath, "empty option in attribute '" + attr.name + "'"});
        else if (!opts.insert(opt).second)
          out.push_back({opath, "duplicate option '" + opt + "' in attribute '" + attr.name + "'"});
      }
    }
  }
  return out;
}

void require_valid(const TaxonomySpec& spec) {
  const auto violations = validate_taxonomy(spec);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid taxonomy (" << violations.size() << " violation"
      << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto& v : violations) msg << "\n  " << v.path << ": " << v.message;
  throw ValidationError(msg.str());
}

std::uint64_t count_subclasses(const TaxonomySpec& spec) {
  std::uint64_t total = 0;
  for (const auto& cls : spec.classes) {
    std::uint64_t prod = 1;
    for (const auto& attr : cls.attributes) prod *= attr.options.size();
    total += cls.attributes.empty() ? 0 : prod;
  }
  return total;
}

std::vector<Query> generate_queries(const TaxonomySpec& spec) {
  require_valid(spec);
  std::vector<Query> out;
  out.reserve(count_subclasses(spec));
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cls = spec.classes[c];
    const std::size_t n_attr = cls.attributes.size();
    std::vector<std::int32_t> idx(n_attr, 0);
    // Odometer over option indices; last attribute varies fastest, which is
    // lexicographic order over option_indices.
    for (;;) {
      std::string text;
      for (std::size_t a = 0; a < n_attr; ++a) {
        text += cls.attributes[a].options[static_cast<std::size_t>(idx[a])];
        text += ' ';
      }
      text += cls.name;
      out.push_back({SubclassKey{static_cast<std::int32_t>(c), idx}, std::move(text)});

      std::size_t pos = n_attr;
      while (pos > 0) {
        --pos;
        if (static_cast<std::size_t>(++idx[pos]) < cls.attributes[pos].options.size()) break;
        idx[pos] = 0;
        if (pos == 0) goto next_class;
      }
    }
  next_class:;
  }
  return out;
}

TaxonomySpec parse_taxonomy(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("taxonomy: not a JSON object");
  TaxonomySpec spec;
  try {
    spec.version = j.value("version", std::string{});
    if (!j.contains("classes") || !j["classes"].is_array())
      throw FormatError("taxonomy: missing 'classes' array");
    for (const auto& jc : j["classes"]) {
      ClassSpec cls;
      cls.name = jc.at("name").get<std::string>();
      for (const auto& ja : jc.value("attributes", nlohmann::json::array())) {
        AttributeSet attr;
        attr.name = ja.at("name").get<std::string>();
        attr.options = ja.at("options").get<std::vector<std::string>>();
        cls.attributes.push_back(std::move(attr));
      }
      spec.classes.push_back(std::move(cls));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("taxonomy: ") + e.what());
  }
  return spec;
}

TaxonomySpec load_taxonomy(const std::filesystem::path& path) {
  return parse_taxonomy(read_file(path));
}

std::string serialize_taxonomy(const TaxonomySpec& spec) {
  nlohmann::ordered_json j;
  j["version"] = spec.version;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& cls : spec.classes) {
    nlohmann::ordered_json jc;
    jc["name"] = cls.name;
    jc["attributes"] = nlohmann::ordered_json::array();
    for (const auto& attr : cls.attributes) {
      nlohmann::ordered_json ja;
      ja["name"] = attr.name;
      ja["options"] = attr.options;
      jc["attributes"].push_back(std::move(ja));
    }
    j["classes"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

std::string build_attribute_prompt(std::string_view class_name, std::string_view attribute,
                                   OptionRange range) {
  std::ostringstream p;
  p << "Show me " << range.min << "-" << range.max << " ways to describe " << attribute << " of "
    << class_name;
  return p.str();
}

std::vector<std::string> parse_option_list(std::string_view response) {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  for (const auto& raw : split(response, '\n')) {
    std::string line = trim(raw);
    // Strip "12.", "12)", "-", "*", "•" list markers.
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) line.erase(0, i + 1);
    else if (!line.empty() && (line[0] == '-' || line[0] == '*')) line.erase(0, 1);
    else if (line.rfind("\xE2\x80\xA2", 0) == 0) line.erase(0, 3);
    std::string opt = normalize_option(line);
    if (opt.empty()) continue;
    if (seen.insert(opt).second) out.push_back(std::move(opt));
  }
  return out;
}

std::vector<std::string> expand_attributes(const TaxonomySpec& spec, std::string_view class_name,
                                           std::string_view attribute, OptionRange range,
                                           PromptClient& client, PromptLog* log,
                                           std::string_view feedback) {
  if (range.min > range.max) throw RangeError("expand_attributes: min > max");
  bool known_class = spec.classes.empty();
  for (const auto& c : spec.classes) known_class = known_class || c.name == class_name;
  if (!known_class) throw ValidationError("expand_attributes: unknown class '" + std::string(class_name) + "'");

  std::string prompt = build_attribute_prompt(class_name, attribute, range);
  if (!feedback.empty()) {
    prompt += "\n";
    prompt += feedback;
  }
  const std::string response = client.complete(prompt);
  if (log) log->record(prompt, response);

  auto options = parse_option_list(response);
  if (options.size() < range.min) {
    throw InsufficientOptionsError("expand_attributes: got " + std::to_string(options.size()) +
                                       " distinct options, need at least " +
                                       std::to_string(range.min),
                                   std::move(options));
  }
  if (options.size() > range.max) options.resize(range.max);
  return options;
}

}  // namespace adc
