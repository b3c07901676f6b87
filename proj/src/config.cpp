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

#include "adc/config.hpp"

#include <set>
#include <yaml-cpp/yaml.h>

namespace adc {
namespace {

void merge_into(YAML::Node base, const YAML::Node& over) {
  for (const auto& kv : over) {
    const auto key = kv.first.as<std::string>();
    if (kv.second.IsMap() && base[key] && base[key].IsMap()) {
      merge_into(base[key], kv.second);
    } else {
      base[key] = YAML::Clone(kv.second);
    }
  }
}

YAML::Node load_layered(const YAML::Node& node, const std::filesystem::path& dir,
                        std::set<std::filesystem::path>& seen) {
  if (!node.IsMap()) throw ConfigError("config: top level must be a map");
  YAML::Node result(YAML::NodeType::Map);
  if (node["inherit_from"]) {
    auto parent = std::filesystem::weakly_canonical(dir / node["inherit_from"].as<std::string>());
    if (!seen.insert(parent).second) throw ConfigError("config: inherit_from cycle at " + parent.string());
    if (!std::filesystem::exists(parent)) throw ConfigError("config: inherit_from file not found: " + parent.string());
    YAML::Node p;
    try {
      p = YAML::LoadFile(parent.string());
    } catch (const YAML::Exception& e) {
      throw ConfigError("config: " + parent.string() + ": " + e.what());
    }
    result = load_layered(p, parent.parent_path(), seen);
  }
  YAML::Node own = YAML::Clone(node);
  own.remove("inherit_from");
  merge_into(result, own);
  return result;
}

template <typename T>
void get(const YAML::Node& n, const char* key, T& out, const std::string& where) {
  if (!n || !n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for " + where + "." + key);
  }
}

void get_path(const YAML::Node& n, const char* key, std::filesystem::path& out,
              const std::filesystem::path& base) {
  if (!n || !n[key] || n[key].IsNull()) return;
  std::filesystem::path p = n[key].as<std::string>();
  out = p.is_absolute() ? p : base / p;
}

}  // namespace

ProjectConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  std::set<std::filesystem::path> seen;
  const YAML::Node n = load_layered(root, base_dir, seen);

  static const std::set<std::string> known{"seed", "logging", "paths", "collect", "curate", "subset"};
  for (const auto& kv : n)
    if (!known.contains(kv.first.as<std::string>()))
      throw ConfigError("config: unknown key '" + kv.first.as<std::string>() + "'");

  ProjectConfig c;
  get(n, "seed", c.seed, "");
  if (n["logging"]) get(n["logging"], "verbosity", c.verbosity, "logging");

  const auto paths = n["paths"];
  get_path(paths, "spec", c.spec, base_dir);
  c.output = base_dir / "out";
  get_path(paths, "output", c.output, base_dir);
  c.manifest = c.output / "manifest.jsonl";
  c.store = c.output / "store";
  c.reports = c.output / "reports";
  get_path(paths, "manifest", c.manifest, base_dir);
  get_path(paths, "store", c.store, base_dir);
  get_path(paths, "reports", c.reports, base_dir);
  get_path(paths, "embeddings", c.embeddings, base_dir);
  get_path(paths, "probs", c.probs, base_dir);

  const auto col = n["collect"];
  get(col, "backend", c.backend, "collect");
  get_path(col, "corpus", c.corpus, base_dir);
  get(col, "workers", c.workers, "collect");
  get(col, "per_query_limit", c.per_query_limit, "collect");
  if (col && col["mock"]) {
    const auto m = col["mock"];
    get(m, "results_per_query", c.mock.results_per_query, "collect.mock");
    get(m, "broken_rate", c.mock.broken_rate, "collect.mock");
    get(m, "malformed_rate", c.mock.malformed_rate, "collect.mock");
    get(m, "duplicate_rate", c.mock.duplicate_rate, "collect.mock");
    get(m, "transient_rate", c.mock.transient_rate, "collect.mock");
  }

  const auto cur = n["curate"];
  get(cur, "methods", c.methods, "curate");
  get(cur, "simifeat_k", c.simifeat_k, "curate");
  get(cur, "knn_vote_k", c.knn_vote_k, "curate");
  get(cur, "rounds", c.consensus_rounds, "curate");
  get(cur, "merge", c.merge, "curate");

  const auto sub = n["subset"];
  get(sub, "clean", c.clean_subset, "subset");
  get(sub, "longtail_rho", c.longtail_rhos, "subset");
  if (sub && sub["split"]) {
    const auto s = sub["split"];
    c.split = true;
    get(s, "eval", c.eval_size, "subset.split");
    get(s, "test", c.test_size, "subset.split");
    get(s, "stratify", c.stratify, "subset.split");
    if (s["tiny"] && !s["tiny"].IsNull()) {
      std::size_t t = 0;
      get(s, "tiny", t, "subset.split");
      c.tiny = t;
    }
  }
  return c;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config: file not found: " + path.string());
  const auto abs = std::filesystem::absolute(path);
  ProjectConfig c = parse_config(read_file(abs), abs.parent_path());
  c.source = abs;
  return c;
}

void ProjectConfig::validate() const {
  if (spec.empty()) throw ConfigError("config: paths.spec is required");
  if (!std::filesystem::exists(spec)) throw ConfigError("config: spec not found: " + spec.string());
  if (backend != "mock" && backend != "local" && backend != "http")
    throw ConfigError("config: unknown backend '" + backend + "'");
  if (backend == "local" && !std::filesystem::is_directory(corpus))
    throw ConfigError("config: local corpus not found: " + corpus.string());
  if (workers == 0) throw ConfigError("config: collect.workers must be > 0");
  if (per_query_limit == 0) throw ConfigError("config: collect.per_query_limit must be > 0");
  static const std::set<std::string> methods_known{"simifeat", "knn_vote", "confident_learning", "cores",
                                                   "percentile"};
  for (const auto& m : methods)
    if (!methods_known.contains(m)) throw ConfigError("config: unknown curation method '" + m + "'");
  if (merge != "union" && merge != "intersection") throw ConfigError("config: merge must be union or intersection");
  for (double r : longtail_rhos)
    if (!(r >= 1.0)) throw ConfigError("config: longtail_rho entries must be >= 1");
  static const std::set<std::string> levels{"quiet", "info", "debug"};
  if (!levels.contains(verbosity)) throw ConfigError("config: verbosity must be quiet, info or debug");
}

}  // namespace adc
