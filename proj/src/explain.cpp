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

#include "adc/explain.hpp"

#include <fstream>
#include <json.hpp>

#include "adc/embedstore.hpp"
#include "adc/manifest.hpp"
#include "adc/report_io.hpp"
#include "adc/taxonomy.hpp"
#include "adc/votes.hpp"

namespace adc {

std::string_view to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kEmbedding: return "embedding";
    case ArtifactKind::kProbability: return "probability";
    case ArtifactKind::kManifest: return "manifest";
    case ArtifactKind::kReport: return "report";
    case ArtifactKind::kBundles: return "filter-bundles";
    case ArtifactKind::kTaxonomy: return "taxonomy";
    case ArtifactKind::kUnknown: return "unknown";
  }
  return "unknown";
}

std::string Explanation::text() const {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  for (const auto& f : failures) out += "integrity failure: " + f + "\n";
  return out;
}

ArtifactKind detect_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const std::string_view m(magic, static_cast<std::size_t>(in.gcount()));
  if (m == magic_for(ContainerKind::kEmbedding)) return ArtifactKind::kEmbedding;
  if (m == magic_for(ContainerKind::kProbability)) return ArtifactKind::kProbability;
  in.clear();
  in.seekg(0);
  std::string first;
  std::getline(in, first);
  const auto j = nlohmann::json::parse(first, nullptr, false);
  if (!j.is_discarded() && j.is_object()) {
    const auto kind = j.value("kind", std::string{});
    if (kind == "adc-manifest") return ArtifactKind::kManifest;
    if (kind == "adc-report") return ArtifactKind::kReport;
    if (kind == "adc-filter-bundles") return ArtifactKind::kBundles;
  }
  // taxonomy files are multi-line JSON objects
  const auto whole = nlohmann::json::parse(read_file(path), nullptr, false);
  if (!whole.is_discarded() && whole.is_object() && whole.contains("classes")) return ArtifactKind::kTaxonomy;
  return ArtifactKind::kUnknown;
}

namespace {

void explain_container(const std::filesystem::path& path, ContainerKind kind, Explanation& ex) {
  ContainerHeader h;
  try {
    h = read_container_header(path);
  } catch (const Error& e) {
    ex.failures.push_back(std::string("header: ") + e.what());
    return;
  }
  ex.lines.push_back(std::string(magic_for(kind)) + " v" + std::to_string(h.version) +
                     ", N=" + std::to_string(h.rows) + ", d=" + std::to_string(h.cols));
  try {
    const auto m = read_container(path, kind);
    ex.lines.push_back(m.row_ids.empty() ? "row ids: none" : "row ids: " + std::to_string(m.row_ids.size()));
    if (kind == ContainerKind::kEmbedding) EmbeddingMatrix{m};
    else validate_probs(m);
  } catch (const Error& e) {
    ex.failures.push_back(std::string("payload: ") + e.what());
  }
}

}  // namespace

Explanation explain(const std::filesystem::path& path) {
  Explanation ex;
  ex.kind = detect_artifact(path);
  switch (ex.kind) {
    case ArtifactKind::kEmbedding: explain_container(path, ContainerKind::kEmbedding, ex); break;
    case ArtifactKind::kProbability: explain_container(path, ContainerKind::kProbability, ex); break;
    case ArtifactKind::kManifest: {
      Manifest m;
      try {
        m = load_manifest(path);
      } catch (const Error& e) {
        ex.failures.push_back(std::string("parse: ") + e.what());
        break;
      }
      ex.lines.push_back("manifest v1, taxonomy " + m.header().taxonomy_version + ", seed " +
                         std::to_string(m.header().seed) + ", " + std::to_string(m.size()) + " records");
      const auto counts = m.status_counts();
      for (std::size_t s = 0; s < kFetchStatusCount; ++s)
        ex.lines.push_back("  " + std::string(to_string(static_cast<FetchStatus>(s))) + ": " +
                           std::to_string(counts[s]));
      try {
        m.check_invariants();
      } catch (const Error& e) {
        ex.failures.push_back(std::string("invariants: ") + e.what());
      }
      break;
    }
    case ArtifactKind::kReport: {
      try {
        const auto r = load_report(path);
        ex.lines.push_back("report, method " + r.method + ", seed " + std::to_string(r.seed) + ", " +
                           std::to_string(r.size()) + " samples, " + std::to_string(r.flagged_count()) +
                           " flagged");
        for (const auto& w : r.warnings) ex.lines.push_back("  warning: " + w);
      } catch (const Error& e) {
        ex.failures.push_back(std::string("parse: ") + e.what());
      }
      break;
    }
    case ArtifactKind::kBundles: {
      try {
        const auto b = parse_bundles(read_file(path));
        ex.lines.push_back("filter bundles, " + std::to_string(b.groups.size()) + " groups of " +
                           std::to_string(b.group_size) + ", min select " + std::to_string(b.min_select));
      } catch (const Error& e) {
        ex.failures.push_back(std::string("parse: ") + e.what());
      }
      break;
    }
    case ArtifactKind::kTaxonomy: {
      try {
        const auto spec = load_taxonomy(path);
        ex.lines.push_back("taxonomy " + spec.version + ", " + std::to_string(spec.classes.size()) +
                           " classes, " + std::to_string(count_subclasses(spec)) + " subclasses");
        for (const auto& v : validate_taxonomy(spec)) ex.failures.push_back(v.path + ": " + v.message);
      } catch (const Error& e) {
        ex.failures.push_back(std::string("parse: ") + e.what());
      }
      break;
    }
    case ArtifactKind::kUnknown:
      throw FormatError("explain: unrecognised file format: " + path.string());
  }
  return ex;
}

}  // namespace adc
