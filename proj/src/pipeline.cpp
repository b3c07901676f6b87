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

#include "adc/pipeline.hpp"

#include <chrono>
#include <json.hpp>
#include <unordered_map>

#include "adc/hashing.hpp"
#include "adc/report_io.hpp"
#include "adc/subsetter.hpp"
#include "adc/taxonomy.hpp"
#include "adc/transition.hpp"

namespace adc {

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::kRan: return "ran";
    case StageStatus::kUpToDate: return "up-to-date";
    case StageStatus::kSkipped: return "skipped";
    case StageStatus::kFailed: return "failed";
  }
  return "failed";
}

const StageResult* RunReport::stage(std::string_view name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "adc-run-report";
  j["seed"] = seed;
  j["ok"] = ok;
  if (!error.empty()) j["error"] = error;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json sj;
    sj["name"] = s.name;
    sj["status"] = to_string(s.status);
    sj["seconds"] = s.seconds;
    sj["counts"] = s.counts;
    sj["notes"] = s.notes;
    j["stages"].push_back(std::move(sj));
  }
  return j.dump(2) + "\n";
}

namespace {

namespace fs = std::filesystem;

std::string file_digest(const fs::path& p) {
  if (!fs::exists(p)) return "absent";
  return sha256_hex(read_file(p));
}

// A stamp records the inputs fingerprint and the digests of the outputs it
// produced; both must still match for the stage to count as done.
class Stamp {
 public:
  Stamp(fs::path dir, std::string stage) : path_(dir / (stage + ".stamp")) {}

  bool current(const std::string& fingerprint) const {
    if (!fs::exists(path_)) return false;
    const auto j = nlohmann::json::parse(read_file(path_), nullptr, false);
    if (j.is_discarded() || j.value("fingerprint", std::string{}) != fingerprint) return false;
    for (const auto& [p, d] : j.at("outputs").items())
      if (file_digest(p) != d.get<std::string>()) return false;
    return true;
  }

  void write(const std::string& fingerprint, const std::vector<fs::path>& outputs) const {
    nlohmann::ordered_json j;
    j["fingerprint"] = fingerprint;
    j["outputs"] = nlohmann::ordered_json::object();
    for (const auto& p : outputs) j["outputs"][p.string()] = file_digest(p);
    fs::create_directories(path_.parent_path());
    write_file_atomic(path_, j.dump());
  }

  void clear() const { fs::remove(path_); }

 private:
  fs::path path_;
};

std::string fingerprint(std::initializer_list<std::string> parts) {
  std::string acc;
  for (const auto& p : parts) {
    acc += p;
    acc.push_back('\x1f');
  }
  return sha256_hex(acc);
}

class Log {
 public:
  Log(std::ostream* out, std::string_view verbosity) : out_(out), quiet_(verbosity == "quiet") {}
  void operator()(const std::string& msg) const {
    if (out_ && !quiet_) *out_ << "adc: " << msg << "\n";
  }

 private:
  std::ostream* out_;
  bool quiet_;
};

fs::path queries_path(const ProjectConfig& c) { return c.output / "queries.txt"; }
fs::path clean_path(const ProjectConfig& c) { return c.output / "clean_manifest.jsonl"; }
fs::path split_path(const ProjectConfig& c) { return c.output / "split_manifest.jsonl"; }
fs::path merged_path(const ProjectConfig& c) { return c.reports / "merged.rep"; }
fs::path longtail_path(const ProjectConfig& c, double rho) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "longtail_rho%g.jsonl", rho);
  return c.output / buf;
}

std::string collect_settings(const ProjectConfig& c) {
  nlohmann::ordered_json j;
  j["backend"] = c.backend;
  j["corpus"] = c.corpus.string();
  j["limit"] = c.per_query_limit;
  j["seed"] = c.stage_seed("collect");
  j["mock"] = {c.mock.results_per_query, c.mock.broken_rate, c.mock.malformed_rate, c.mock.duplicate_rate,
               c.mock.transient_rate};
  return j.dump();
}

std::string curate_settings(const ProjectConfig& c) {
  nlohmann::ordered_json j;
  j["methods"] = c.methods;
  j["k"] = {c.simifeat_k, c.knn_vote_k, c.consensus_rounds};
  j["merge"] = c.merge;
  j["seed"] = c.stage_seed("curate");
  return j.dump();
}

std::string subset_settings(const ProjectConfig& c) {
  nlohmann::ordered_json j;
  j["clean"] = c.clean_subset;
  j["rho"] = c.longtail_rhos;
  j["split"] = {c.split, c.eval_size, c.test_size, c.stratify, c.tiny ? static_cast<long long>(*c.tiny) : -1};
  j["seed"] = c.stage_seed("subset");
  return j.dump();
}

void stage_design(const ProjectConfig& c, StageResult& r, const Stamp& stamp, bool force) {
  const std::string fp = fingerprint({"design", file_digest(c.spec)});
  if (!force && stamp.current(fp)) {
    r.status = StageStatus::kUpToDate;
    return;
  }
  const auto spec = load_taxonomy(c.spec);
  require_valid(spec);
  const auto queries = generate_queries(spec);
  std::string text;
  for (const auto& q : queries) text += q.text + "\n";
  fs::create_directories(c.output);
  write_file_atomic(queries_path(c), text);
  r.counts["classes"] = static_cast<double>(spec.classes.size());
  r.counts["queries"] = static_cast<double>(queries.size());
  r.status = StageStatus::kRan;
  stamp.write(fp, {queries_path(c)});
}

void stage_collect(const ProjectConfig& c, const PipelineOptions& opt, StageResult& r, const Stamp& stamp,
                   const Log& log) {
  const std::string fp = fingerprint({"collect", file_digest(c.spec), collect_settings(c)});
  if (!opt.force && stamp.current(fp)) {
    r.status = StageStatus::kUpToDate;
    return;
  }
  const auto spec = load_taxonomy(c.spec);
  const auto tasks = plan_fetch(generate_queries(spec), c.per_query_limit);

  std::unique_ptr<SearchBackend> owned;
  SearchBackend* backend = opt.backend;
  if (!backend) {
    MockOptions mock = c.mock;
    mock.seed = c.stage_seed("collect");
    owned = make_backend(c.backend, c.corpus, mock);
    backend = owned.get();
  }
  ManifestHeader header{spec.version, c.seed};
  Manifest manifest = fs::exists(c.manifest) ? load_manifest(c.manifest) : Manifest(header);
  fs::create_directories(c.manifest.parent_path());
  ContentStore store(c.store);
  FetchOptions fo;
  fo.workers = c.workers;
  fo.seed = c.stage_seed("collect");
  FetchReport fr;
  {
    ManifestWriter writer(c.manifest, header);
    fr = run_fetch(tasks, *backend, manifest, store, fo, &writer);
  }
  const DedupReport dr = dedup_and_validate(manifest, store);
  save_manifest(manifest, c.manifest);
  for (const auto& e : fr.errors) r.notes.push_back(e);
  for (const auto& e : dr.integrity_errors) r.notes.push_back(e);
  r.counts["tasks"] = static_cast<double>(fr.tasks);
  r.counts["candidates"] = static_cast<double>(fr.candidates);
  r.counts["downloads"] = static_cast<double>(fr.downloads);
  r.counts["fetched"] = static_cast<double>(manifest.count(FetchStatus::kFetched));
  r.counts["broken"] = static_cast<double>(manifest.count(FetchStatus::kBroken));
  r.counts["malformed"] = static_cast<double>(manifest.count(FetchStatus::kMalformed));
  r.counts["duplicate"] = static_cast<double>(manifest.count(FetchStatus::kDuplicate));
  r.counts["pending"] = static_cast<double>(manifest.count(FetchStatus::kPending));
  r.status = StageStatus::kRan;
  log("collect: " + std::to_string(manifest.count(FetchStatus::kFetched)) + " fetched of " +
      std::to_string(manifest.size()));
  // leave unstamped while anything is pending so the next run retries it
  if (manifest.count(FetchStatus::kPending) == 0) stamp.write(fp, {c.manifest});
  else stamp.clear();
}

void stage_curate(const ProjectConfig& c, const PipelineOptions& opt, StageResult& r, const Stamp& stamp,
                  const Log& log) {
  if (c.embeddings.empty() || !fs::exists(c.embeddings)) {
    r.status = StageStatus::kSkipped;
    r.notes.push_back("no embeddings; run feature extraction first");
    return;
  }
  const std::string fp = fingerprint({"curate", file_digest(c.manifest), file_digest(c.embeddings),
                                      file_digest(sidecar_path(c.embeddings)),
                                      c.probs.empty() ? "" : file_digest(c.probs), curate_settings(c)});
  if (!opt.force && stamp.current(fp)) {
    r.status = StageStatus::kUpToDate;
    return;
  }
  const auto spec = load_taxonomy(c.spec);
  const Manifest manifest = load_manifest(c.manifest);
  auto reports = run_curation(c, manifest, spec.classes.size(), &r.notes);
  fs::create_directories(c.reports);
  std::vector<fs::path> outputs;
  for (const auto& rep : reports) {
    const auto p = c.reports / (rep.method + ".rep");
    save_report(rep, p);
    outputs.push_back(p);
    r.counts["flagged." + rep.method] = static_cast<double>(rep.flagged_count());
  }
  const auto merged = merge_filters(reports, parse_merge_mode(c.merge));
  save_report(merged.report, merged_path(c));
  outputs.push_back(merged_path(c));
  r.counts["samples"] = static_cast<double>(merged.stats.samples);
  r.counts["flagged"] = static_cast<double>(merged.stats.combined_count);
  r.counts["overlap"] = static_cast<double>(merged.stats.overlap_count);
  r.status = StageStatus::kRan;
  log("curate: flagged " + std::to_string(merged.stats.combined_count) + " of " +
      std::to_string(merged.stats.samples));
  stamp.write(fp, outputs);
}

void stage_subset(const ProjectConfig& c, const PipelineOptions& opt, StageResult& r, const Stamp& stamp) {
  const bool have_reports = fs::exists(merged_path(c));
  const std::string fp = fingerprint({"subset", file_digest(c.manifest),
                                      have_reports ? file_digest(merged_path(c)) : "", subset_settings(c)});
  if (!opt.force && stamp.current(fp)) {
    r.status = StageStatus::kUpToDate;
    return;
  }
  const Manifest manifest = load_manifest(c.manifest);
  std::vector<fs::path> outputs;
  Manifest base = manifest;
  if (c.clean_subset && have_reports) {
    const CurationReport merged = load_report(merged_path(c));
    const CleanSubset clean = build_clean_subset(manifest, std::span(&merged, 1));
    save_manifest(clean.manifest, clean_path(c));
    outputs.push_back(clean_path(c));
    r.counts["clean.retained"] = static_cast<double>(clean.retained);
    r.counts["clean.removed"] = static_cast<double>(clean.removed);
    for (const auto& w : clean.warnings) r.notes.push_back(w);
    base = clean.manifest;
  } else if (c.clean_subset) {
    r.notes.push_back("no curation reports; clean subset not built");
  }
  if (c.split) {
    SplitOptions so;
    so.eval_size = c.eval_size;
    so.test_size = c.test_size;
    so.seed = c.stage_seed("split");
    so.stratify = c.stratify;
    so.tiny = c.tiny;
    const Manifest split = split_dataset(base, so);
    save_manifest(split, split_path(c));
    outputs.push_back(split_path(c));
    std::vector<Split> s;
    for (const auto& rec : split.records()) s.push_back(rec.split);
    const auto counts = count_splits(s);
    r.counts["split.train"] = static_cast<double>(counts.train);
    r.counts["split.eval"] = static_cast<double>(counts.eval);
    r.counts["split.test"] = static_cast<double>(counts.test);
  }
  for (double rho : c.longtail_rhos) {
    std::map<ClassIndex, std::size_t> per_class;
    for (const auto* rec : base.fetched()) ++per_class[rec->webly_label];
    std::size_t n_max = 0, n_min = SIZE_MAX;
    for (const auto& [_, n] : per_class) {
      n_max = std::max(n_max, n);
      n_min = std::min(n_min, n);
    }
    // the head class keeps every sample; shrink when a tail class cannot supply its quota
    ClassDistribution dist = longtail_counts(n_max, per_class.size(), rho);
    std::vector<std::size_t> avail;
    for (const auto& [_, n] : per_class) avail.push_back(n);
    std::sort(avail.rbegin(), avail.rend());
    while (n_max > 0) {
      bool ok = true;
      for (std::size_t i = 0; i < avail.size(); ++i) ok = ok && avail[i] >= dist.counts[i];
      if (ok) break;
      --n_max;
      if (static_cast<double>(n_max) < rho) throw ValidationError("longtail: classes too small for rho");
      dist = longtail_counts(n_max, per_class.size(), rho);
    }
    const auto lt = build_longtail_subset(base, dist, derive_seed(c.stage_seed("subset"), "rho"));
    save_manifest(lt.manifest, longtail_path(c, rho));
    outputs.push_back(longtail_path(c, rho));
    r.counts["longtail." + std::to_string(static_cast<long long>(rho))] = static_cast<double>(lt.manifest.size());
  }
  r.status = outputs.empty() ? StageStatus::kSkipped : StageStatus::kRan;
  stamp.write(fp, outputs);
}

}  // namespace

EmbeddingMatrix align_embeddings(const EmbeddingMatrix& features, const Manifest& manifest) {
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < features.n_rows(); ++i) row.emplace(features.row_ids()[i], i);
  const auto fetched = manifest.fetched();
  std::vector<float> data;
  std::vector<std::string> ids;
  data.reserve(fetched.size() * features.dim());
  for (const auto* rec : fetched) {
    auto it = row.find(rec->sample_id);
    if (it == row.end()) throw ValidationError("embeddings: no row for sample " + rec->sample_id);
    const auto v = features.row(it->second);
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(rec->sample_id);
  }
  return EmbeddingMatrix(fetched.size(), features.dim(), std::move(data), std::move(ids));
}

DenseMatrix align_rows(const DenseMatrix& m, const Manifest& manifest) {
  if (m.row_ids.empty()) throw ValidationError("probabilities: row ids required to align with the manifest");
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < m.rows; ++i) row.emplace(m.row_ids[i], i);
  DenseMatrix out;
  out.cols = m.cols;
  for (const auto* rec : manifest.fetched()) {
    auto it = row.find(rec->sample_id);
    if (it == row.end()) throw ValidationError("probabilities: no row for sample " + rec->sample_id);
    const auto v = m.row(it->second);
    out.data.insert(out.data.end(), v.begin(), v.end());
    out.row_ids.push_back(rec->sample_id);
    ++out.rows;
  }
  return out;
}

std::vector<CurationReport> run_curation(const ProjectConfig& c, const Manifest& manifest,
                                         std::size_t num_classes, std::vector<std::string>* notes) {
  const EmbeddingMatrix features = align_embeddings(read_embeddings(c.embeddings), manifest);
  std::vector<ClassIndex> labels;
  for (const auto* rec : manifest.fetched()) labels.push_back(rec->webly_label);
  std::optional<DenseMatrix> probs;
  std::vector<CurationReport> out;
  const std::uint64_t seed = c.stage_seed("curate");
  for (const auto& m : c.methods) {
    if (m == "simifeat") {
      ConsensusConfig cc;
      cc.rounds = c.consensus_rounds;
      cc.seed = derive_seed(seed, "consensus");
      const auto t = estimate_transition(features, labels, num_classes, cc);
      out.push_back(simifeat_detect(features, labels, t, c.simifeat_k));
    } else if (m == "knn_vote") {
      out.push_back(knn_vote_detect(features, labels, num_classes,
                                    std::min(c.knn_vote_k, features.n_rows() - 1)));
    } else {
      if (c.probs.empty() || !std::filesystem::exists(c.probs)) {
        if (notes) notes->push_back(m + ": no probability file, skipped");
        continue;
      }
      if (!probs) probs = align_rows(read_probs(c.probs), manifest);
      if (m == "confident_learning") out.push_back(confident_learning_detect(*probs, labels));
      else if (m == "cores") out.push_back(cores_score_detect(*probs, labels));
      else out.push_back(confidence_percentile_filter(*probs, labels));
    }
    out.back().seed = seed;
  }
  if (out.empty()) throw ValidationError("curate: no method produced a report");
  return out;
}

RunReport run_pipeline(const ProjectConfig& config, const PipelineOptions& options) {
  RunReport report;
  report.seed = config.seed;
  config.validate();
  const Log log(options.log, config.verbosity);
  const fs::path stamps = config.output / ".stamps";
  fs::create_directories(config.output);

  auto run = [&](const std::string& name, auto&& body) {
    StageResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(r, Stamp(stamps, name));
    } catch (const std::exception& e) {
      r.status = StageStatus::kFailed;
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.stages.push_back(std::move(r));
      report.ok = false;
      report.error = "stage " + name + ": " + e.what();
      write_file_atomic(config.output / "run_report.json", report.to_json());
      throw StageError(name, e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log(name + ": " + std::string(to_string(r.status)));
    report.stages.push_back(std::move(r));
  };

  run("design", [&](StageResult& r, const Stamp& s) { stage_design(config, r, s, options.force); });
  run("collect", [&](StageResult& r, const Stamp& s) { stage_collect(config, options, r, s, log); });
  run("curate", [&](StageResult& r, const Stamp& s) { stage_curate(config, options, r, s, log); });
  run("subset", [&](StageResult& r, const Stamp& s) { stage_subset(config, options, r, s); });
  write_file_atomic(config.output / "run_report.json", report.to_json());
  return report;
}

}  // namespace adc
