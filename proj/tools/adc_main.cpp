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

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "adc/collector.hpp"
#include "adc/config.hpp"
#include "adc/curator.hpp"
#include "adc/embedstore.hpp"
#include "adc/evalkit.hpp"
#include "adc/explain.hpp"
#include "adc/manifest.hpp"
#include "adc/pipeline.hpp"
#include "adc/report_io.hpp"
#include "adc/subsetter.hpp"
#include "adc/taxonomy.hpp"
#include "adc/transition.hpp"
#include "adc/votes.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Options left empty on the command line fall back to the config file.
struct Common {
  std::string config;
  std::optional<adc::ProjectConfig> cfg;

  void load() {
    if (!config.empty() && !cfg) cfg = adc::load_config(config);
  }
  void fill(std::string& value, const fs::path& from_config) {
    load();
    if (value.empty() && cfg && !from_config.empty()) value = from_config.string();
  }
  std::uint64_t seed(std::optional<std::uint64_t> given, std::string_view stage) {
    load();
    if (given) return *given;
    return cfg ? cfg->stage_seed(stage) : 0;
  }
};

void require(const std::string& value, const char* name) {
  if (value.empty()) throw adc::ValidationError(std::string("missing required option ") + name);
}

void emit(const ojson& j, const std::string& out) {
  if (out.empty()) std::cout << j.dump(2) << "\n";
  else adc::write_file_atomic(out, j.dump(2) + "\n");
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string canonical_method(const std::string& m) {
  if (m == "knn") return "knn_vote";
  if (m == "cl") return "confident_learning";
  if (m == "conf") return "percentile";
  return m;
}

std::vector<adc::ClassIndex> fetched_labels(const adc::Manifest& m) {
  std::vector<adc::ClassIndex> out;
  for (const auto* r : m.fetched()) out.push_back(r->webly_label);
  return out;
}

std::size_t infer_classes(const std::vector<adc::ClassIndex>& labels, const std::string& spec) {
  if (!spec.empty()) return adc::load_taxonomy(spec).classes.size();
  adc::ClassIndex mx = -1;
  for (auto l : labels) mx = std::max(mx, l);
  return static_cast<std::size_t>(mx + 1);
}

// design -------------------------------------------------------------------

void add_design(CLI::App& app, Common& common) {
  auto* design = app.add_subcommand("design", "Validate and expand a taxonomy spec");
  design->require_subcommand(1);

  static std::string spec, out, cls, attr, replay, log_path;
  static std::size_t lo = 30, hi = 80;

  auto* validate = design->add_subcommand("validate", "Check a spec and print its shape");
  validate->add_option("--spec", spec, "Taxonomy spec file");
  validate->add_option("--config", common.config, "Project config");
  validate->callback([=, &common] {
    common.fill(spec, common.cfg ? common.cfg->spec : fs::path{});
    require(spec, "--spec");
    const auto s = adc::load_taxonomy(spec);
    const auto violations = adc::validate_taxonomy(s);
    for (const auto& v : violations) std::cerr << "adc: " << v.path << ": " << v.message << "\n";
    if (!violations.empty()) throw adc::ValidationError(std::to_string(violations.size()) + " violation(s)");
    std::cout << "taxonomy " << s.version << ": " << s.classes.size() << " classes, "
              << adc::count_subclasses(s) << " subclasses\n";
  });

  auto* queries = design->add_subcommand("queries", "Write one search query per subclass");
  queries->add_option("--spec", spec, "Taxonomy spec file");
  queries->add_option("--out", out, "Output file (stdout when omitted)");
  queries->add_option("--config", common.config, "Project config");
  queries->callback([=, &common] {
    common.fill(spec, common.cfg ? common.cfg->spec : fs::path{});
    require(spec, "--spec");
    const auto s = adc::load_taxonomy(spec);
    adc::require_valid(s);
    std::string text;
    for (const auto& q : adc::generate_queries(s)) text += q.text + "\n";
    if (out.empty()) std::cout << text;
    else adc::write_file_atomic(out, text);
  });

  auto* expand = design->add_subcommand("expand", "Ask the prompt service for attribute options");
  expand->add_option("--spec", spec, "Taxonomy spec file");
  expand->add_option("--class", cls, "Class name")->required();
  expand->add_option("--attribute", attr, "Attribute name")->required();
  expand->add_option("--min", lo, "Minimum option count");
  expand->add_option("--max", hi, "Maximum option count");
  expand->add_option("--replay", replay, "Replay a recorded prompt log instead of calling the service");
  expand->add_option("--log", log_path, "Append prompt/response pairs here");
  expand->add_option("--out", out, "Write the updated spec here");
  expand->add_option("--config", common.config, "Project config");
  expand->callback([=, &common] {
    common.fill(spec, common.cfg ? common.cfg->spec : fs::path{});
    require(spec, "--spec");
    auto s = adc::load_taxonomy(spec);
    std::unique_ptr<adc::PromptClient> client;
    if (!replay.empty()) client = std::make_unique<adc::ReplayPromptClient>(adc::PromptLog::load(replay));
    else client = std::make_unique<adc::HttpPromptClient>(adc::HttpPromptClient::from_env());
    std::optional<adc::PromptLog> log;
    if (!log_path.empty()) log.emplace(log_path);
    const auto options = adc::expand_attributes(s, cls, attr, {lo, hi}, *client, log ? &*log : nullptr);
    bool placed = false;
    for (auto& c : s.classes) {
      if (c.name != cls) continue;
      for (auto& a : c.attributes)
        if (a.name == attr) {
          a.options = options;
          placed = true;
        }
      if (!placed) {
        c.attributes.push_back({attr, options});
        placed = true;
      }
    }
    if (!placed) throw adc::ValidationError("unknown class '" + cls + "'");
    std::cerr << "adc: " << options.size() << " options for " << cls << "/" << attr << "\n";
    if (!out.empty()) adc::write_file_atomic(out, adc::serialize_taxonomy(s));
    else
      for (const auto& o : options) std::cout << o << "\n";
  });
}

// collect ------------------------------------------------------------------

void add_collect(CLI::App& app, Common& common) {
  static std::string spec, backend, corpus, out, manifest_path;
  static std::size_t limit = 0, workers = 0;
  static std::optional<std::uint64_t> seed;
  static double broken = 0.0, transient = 0.0;
  auto* cmd = app.add_subcommand("collect", "Search, download and deduplicate samples");
  cmd->add_option("--spec", spec, "Taxonomy spec file");
  cmd->add_option("--backend", backend, "mock | local | http");
  cmd->add_option("--corpus", corpus, "Root of a local corpus (local backend)");
  cmd->add_option("--limit", limit, "Results per query (default 100)");
  cmd->add_option("--workers", workers, "Parallel workers (default 30)");
  cmd->add_option("--out", out, "Output directory (manifest.jsonl, store/)");
  cmd->add_option("--manifest", manifest_path, "Manifest path (default <out>/manifest.jsonl)");
  cmd->add_option("--seed", seed, "Seed");
  cmd->add_option("--mock-broken-rate", broken, "Mock backend broken-link rate");
  cmd->add_option("--mock-transient-rate", transient, "Mock backend transient failure rate");
  cmd->add_option("--config", common.config, "Project config");
  cmd->callback([=, &common] {
    common.load();
    const auto* c = common.cfg ? &*common.cfg : nullptr;
    if (c) {
      common.fill(spec, c->spec);
      common.fill(out, c->output);
      common.fill(corpus, c->corpus);
      common.fill(manifest_path, c->manifest);
      if (backend.empty()) backend = c->backend;
      if (!limit) limit = c->per_query_limit;
      if (!workers) workers = c->workers;
    }
    require(spec, "--spec");
    require(out, "--out");
    if (backend.empty()) backend = "mock";
    if (!limit) limit = adc::kDefaultPerQueryLimit;
    if (!workers) workers = adc::kDefaultWorkers;
    if (manifest_path.empty()) manifest_path = (fs::path(out) / "manifest.jsonl").string();

    const auto s = adc::load_taxonomy(spec);
    adc::require_valid(s);
    const auto tasks = adc::plan_fetch(adc::generate_queries(s), limit);
    adc::MockOptions mock = c ? c->mock : adc::MockOptions{};
    mock.seed = common.seed(seed, "collect");
    if (broken > 0.0) mock.broken_rate = broken;
    if (transient > 0.0) mock.transient_rate = transient;
    auto be = adc::make_backend(backend, corpus, mock);

    fs::create_directories(out);
    const adc::ManifestHeader header{s.version, common.seed(seed, "collect")};
    adc::Manifest m = fs::exists(manifest_path) ? adc::load_manifest(manifest_path) : adc::Manifest(header);
    adc::ContentStore store(c && !c->store.empty() ? c->store : fs::path(out) / "store");
    adc::FetchOptions fo;
    fo.workers = workers;
    fo.seed = header.seed;
    adc::FetchReport fr;
    {
      adc::ManifestWriter writer(manifest_path, header);
      fr = adc::run_fetch(tasks, *be, m, store, fo, &writer);
    }
    const auto dr = adc::dedup_and_validate(m, store);
    adc::save_manifest(m, manifest_path);
    for (const auto& e : fr.errors) std::cerr << "adc: " << e << "\n";
    for (const auto& e : dr.integrity_errors) std::cerr << "adc: integrity: " << e << "\n";
    std::cerr << "adc: " << fr.tasks << " queries, " << fr.candidates << " candidates, "
              << m.count(adc::FetchStatus::kFetched) << " fetched, " << m.count(adc::FetchStatus::kBroken)
              << " broken, " << m.count(adc::FetchStatus::kMalformed) << " malformed, "
              << m.count(adc::FetchStatus::kDuplicate) << " duplicate, "
              << m.count(adc::FetchStatus::kPending) << " pending\n";
  });
}

// curate -------------------------------------------------------------------

void add_curate(CLI::App& app, Common& common) {
  static std::string manifest_path, embeddings, probs, method, out, spec, sign = "above";
  static std::size_t k = 0, rounds = 50, relabel_k = 0;
  static double percent = 25.0;
  static std::optional<std::uint64_t> seed;
  auto* cmd = app.add_subcommand("curate", "Detect noisy labels");
  cmd->add_option("--manifest", manifest_path, "Manifest file");
  cmd->add_option("--embeddings", embeddings, "Embedding container (ADCE)");
  cmd->add_option("--probs", probs, "Probability container (ADCP)");
  cmd->add_option("--method", method, "simifeat | knn | cl | cores | conf");
  cmd->add_option("--out", out, "Report file");
  cmd->add_option("--spec", spec, "Taxonomy spec (for the class count)");
  cmd->add_option("--k", k, "Neighbours (simifeat 10, knn 100)");
  cmd->add_option("--rounds", rounds, "Consensus rounds for the transition estimate");
  cmd->add_option("--percent", percent, "Percentile for conf");
  cmd->add_option("--cores-sign", sign, "above | below");
  cmd->add_option("--relabel", relabel_k, "Suggest labels from k unflagged neighbours");
  cmd->add_option("--seed", seed, "Seed");
  cmd->add_option("--config", common.config, "Project config");

  static std::string mode = "union", merge_out;
  static std::vector<std::string> inputs;
  auto* merge = cmd->add_subcommand("merge", "Union or intersection of reports");
  merge->add_option("--mode", mode, "union | intersection");
  merge->add_option("--out", merge_out, "Merged report file");
  merge->add_option("reports", inputs, "Report files")->required();
  merge->callback([=, &common] {
    std::vector<adc::CurationReport> reps;
    for (const auto& p : inputs) reps.push_back(adc::load_report(p));
    const auto res = adc::merge_filters(reps, adc::parse_merge_mode(mode));
    if (!merge_out.empty()) adc::save_report(res.report, merge_out);
    std::cout << adc::merge_stats_json(res.stats) << "\n";
  });

  cmd->callback([=, &common] {
    if (cmd->got_subcommand(merge)) return;
    common.load();
    const auto* c = common.cfg ? &*common.cfg : nullptr;
    if (c) {
      common.fill(manifest_path, c->manifest);
      common.fill(embeddings, c->embeddings);
      common.fill(probs, c->probs);
      common.fill(spec, c->spec);
      if (method.empty() && !c->methods.empty()) method = c->methods.front();
    }
    require(manifest_path, "--manifest");
    require(method, "--method");
    require(out, "--out");
    const std::string m = canonical_method(method);
    const auto manifest = adc::load_manifest(manifest_path);
    const auto labels = fetched_labels(manifest);
    const std::size_t num_classes = infer_classes(labels, spec);
    const std::uint64_t s = common.seed(seed, "curate");

    std::optional<adc::EmbeddingMatrix> feats;
    if (!embeddings.empty()) feats.emplace(adc::align_embeddings(adc::read_embeddings(embeddings), manifest));
    auto need_feats = [&] {
      if (!feats) throw adc::ValidationError("method " + method + " needs --embeddings");
      return *feats;
    };
    auto need_probs = [&] {
      if (probs.empty()) throw adc::ValidationError("method " + method + " needs --probs");
      return adc::align_rows(adc::read_probs(probs), manifest);
    };

    adc::CurationReport rep;
    if (m == "simifeat") {
      adc::ConsensusConfig cc;
      cc.rounds = rounds;
      cc.seed = adc::derive_seed(s, "consensus");
      const auto& f = need_feats();
      const auto t = adc::estimate_transition(f, labels, num_classes, cc);
      rep = adc::simifeat_detect(f, labels, t, k ? k : adc::kSimiFeatK);
    } else if (m == "knn_vote") {
      rep = adc::knn_vote_detect(need_feats(), labels, num_classes, k ? k : adc::kKnnVoteK);
    } else if (m == "confident_learning") {
      rep = adc::confident_learning_detect(need_probs(), labels);
    } else if (m == "cores") {
      if (sign != "above" && sign != "below") throw adc::ValidationError("--cores-sign must be above or below");
      rep = adc::cores_score_detect(need_probs(), labels,
                                    sign == "above" ? adc::CoresSign::kFlagAbove : adc::CoresSign::kFlagBelow);
    } else if (m == "percentile") {
      rep = adc::confidence_percentile_filter(need_probs(), labels, percent);
    } else {
      throw adc::ValidationError("unknown method '" + method + "'");
    }
    if (relabel_k) rep = adc::knn_relabel(need_feats(), labels, rep, relabel_k);
    rep.seed = s;
    for (const auto& w : rep.warnings) std::cerr << "adc: warning: " << w << "\n";
    adc::save_report(rep, out);
    std::cerr << "adc: " << rep.method << " flagged " << rep.flagged_count() << " of " << rep.size() << "\n";
  });
}

// votes --------------------------------------------------------------------

void add_votes(CLI::App& app, Common& common) {
  auto* votes = app.add_subcommand("votes", "Human verification tasks and vote aggregation");
  votes->require_subcommand(1);

  static std::string manifest_path, out, spec, split, bundles, selections, input, policy = "majority";
  static std::size_t group = 20, min_select = 4, per_bundle = 10;
  static std::optional<std::uint64_t> seed;

  auto* ex = votes->add_subcommand("export-filter", "Write grouped filter tasks");
  ex->add_option("--manifest", manifest_path, "Manifest file");
  ex->add_option("--out", out, "Bundle file")->required();
  ex->add_option("--spec", spec, "Taxonomy spec (class names)");
  ex->add_option("--split", split, "Only this split (train|eval|test)");
  ex->add_option("--group-size", group, "Images per group");
  ex->add_option("--min-select", min_select, "Minimum selections per group");
  ex->add_option("--tasks-per-bundle", per_bundle, "Groups per work unit");
  ex->add_option("--seed", seed, "Seed");
  ex->add_option("--config", common.config, "Project config");
  ex->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    common.fill(spec, common.cfg ? common.cfg->spec : fs::path{});
    require(manifest_path, "--manifest");
    const auto m = adc::load_manifest(manifest_path);
    adc::FilterBundleOptions o{group, min_select, per_bundle, common.seed(seed, "votes"), std::nullopt};
    if (!split.empty()) o.split = adc::parse_split(split);
    std::optional<adc::TaxonomySpec> tax;
    if (!spec.empty()) tax = adc::load_taxonomy(spec);
    const auto set = adc::export_filter_bundles(m, o, tax ? &*tax : nullptr);
    for (const auto& w : set.warnings) std::cerr << "adc: warning: " << w << "\n";
    adc::write_file_atomic(out, adc::serialize_bundles(set));
    std::cerr << "adc: " << set.groups.size() << " groups\n";
  });

  auto* im = votes->add_subcommand("import-filter", "Mark selected samples as clean candidates");
  im->add_option("--manifest", manifest_path, "Manifest file (updated in place)");
  im->add_option("--bundles", bundles, "Bundle file")->required();
  im->add_option("--selections", selections, "Selections file")->required();
  im->add_option("--config", common.config, "Project config");
  im->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    require(manifest_path, "--manifest");
    auto m = adc::load_manifest(manifest_path);
    const auto set = adc::parse_bundles(adc::read_file(bundles));
    const auto sel = adc::parse_selections(adc::read_file(selections));
    const auto rep = adc::import_filter_selections(set, sel, m);
    for (const auto& v : rep.violations) std::cerr << "adc: rejected " << v << "\n";
    adc::save_manifest(m, manifest_path);
    std::cerr << "adc: " << rep.accepted_groups << " groups accepted, " << rep.rejected_groups
              << " rejected, " << rep.marked << " samples marked\n";
  });

  auto* ag = votes->add_subcommand("aggregate", "Aggregate three-way votes");
  ag->add_option("--votes", input, "Votes file")->required();
  ag->add_option("--policy", policy, "majority | strict");
  ag->add_option("--out", out, "Write the summary here (stdout when omitted)");
  ag->add_option("--config", common.config, "Project config");
  ag->callback([=, &common] {
    const auto records = adc::load_votes(input);
    const auto res = adc::aggregate_votes(records, adc::parse_policy(policy));
    ojson j;
    j["policy"] = adc::to_string(adc::parse_policy(policy));
    j["samples"] = res.verdicts.size();
    j["clean"] = res.clean;
    j["noisy"] = res.noisy;
    ojson dist;
    for (std::size_t p = 0; p < adc::kPatternCount; ++p) {
      const auto pat = static_cast<adc::VotePattern>(p);
      dist[std::string(adc::to_string(pat))] = {{"count", res.distribution.counts[p]},
                                                {"fraction", res.distribution.fraction(pat)}};
    }
    j["distribution"] = dist;
    if (res.distribution.total) {
      const auto iv = adc::estimate_noise_interval(res.distribution);
      j["noise_interval"] = {{"lower", iv.lower}, {"upper", iv.upper}, {"ambiguity", iv.ambiguity}};
    }
    ojson ann = ojson::object();
    for (const auto& [id, c] : res.annotator_counts) ann[id] = {{"yes", c[0]}, {"unsure", c[1]}, {"no", c[2]}};
    j["annotators"] = ann;
    emit(j, out);
  });
}

// subset -------------------------------------------------------------------

void add_subset(CLI::App& app, Common& common) {
  auto* sub = app.add_subcommand("subset", "Derived datasets");
  sub->require_subcommand(1);
  static std::string manifest_path, out, reports, mode = "union";
  static double rho = 10.0;
  static std::size_t n_max = 0, eval = 20000, test = 20000, tiny = 0;
  static bool no_stratify = false;
  static std::optional<std::uint64_t> seed;

  auto* lt = sub->add_subcommand("longtail", "Exponential long-tail class profile");
  lt->add_option("--manifest", manifest_path, "Manifest file");
  lt->add_option("--rho", rho, "Imbalance ratio");
  lt->add_option("--n-max", n_max, "Head class size (default: largest class)");
  lt->add_option("--seed", seed, "Seed");
  lt->add_option("--out", out, "Subset manifest")->required();
  lt->add_option("--config", common.config, "Project config");
  lt->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    require(manifest_path, "--manifest");
    const auto m = adc::load_manifest(manifest_path);
    std::map<adc::ClassIndex, std::size_t> per_class;
    for (const auto* r : m.fetched()) ++per_class[r->webly_label];
    std::size_t head = n_max;
    if (!head)
      for (const auto& [_, n] : per_class) head = std::max(head, n);
    const auto dist = adc::longtail_counts(head, per_class.size(), rho);
    const auto res = adc::build_longtail_subset(m, dist, common.seed(seed, "subset"));
    adc::save_manifest(res.manifest, out);
    ojson j;
    j["rho"] = rho;
    j["counts"] = dist.counts;
    j["total"] = dist.total();
    j["class_order"] = res.class_order;
    std::cout << j.dump() << "\n";
  });

  auto* cl = sub->add_subcommand("clean", "Drop samples flagged by curation reports");
  cl->add_option("--manifest", manifest_path, "Manifest file");
  cl->add_option("--reports", reports, "Comma-separated report files");
  cl->add_option("--mode", mode, "union | intersection");
  cl->add_option("--out", out, "Subset manifest")->required();
  cl->add_option("--config", common.config, "Project config");
  cl->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    require(manifest_path, "--manifest");
    const auto m = adc::load_manifest(manifest_path);
    std::vector<adc::CurationReport> reps;
    if (!reports.empty())
      for (const auto& p : adc::split(reports, ',')) reps.push_back(adc::load_report(adc::trim(p)));
    const auto res = adc::build_clean_subset(m, reps, adc::parse_merge_mode(mode));
    for (const auto& w : res.warnings) std::cerr << "adc: warning: " << w << "\n";
    adc::save_manifest(res.manifest, out);
    ojson j = ojson::parse(adc::merge_stats_json(res.stats));
    j["removed"] = res.removed;
    j["retained"] = res.retained;
    j["retained_fraction"] = res.retained_fraction;
    std::cout << j.dump() << "\n";
  });

  auto* sp = sub->add_subcommand("split", "Assign train/eval/test splits");
  sp->add_option("--manifest", manifest_path, "Manifest file");
  sp->add_option("--eval", eval, "Eval size");
  sp->add_option("--test", test, "Test size");
  sp->add_option("--tiny", tiny, "Keep this many train rows");
  sp->add_flag("--no-stratify", no_stratify, "Plain random split");
  sp->add_option("--seed", seed, "Seed");
  sp->add_option("--out", out, "Output manifest (default: in place)");
  sp->add_option("--config", common.config, "Project config");
  sp->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    require(manifest_path, "--manifest");
    const auto m = adc::load_manifest(manifest_path);
    adc::SplitOptions o;
    o.eval_size = eval;
    o.test_size = test;
    o.seed = common.seed(seed, "split");
    o.stratify = !no_stratify;
    if (tiny) o.tiny = tiny;
    const auto res = adc::split_dataset(m, o);
    adc::save_manifest(res, out.empty() ? manifest_path : out);
    std::vector<adc::Split> s;
    for (const auto& r : res.records()) s.push_back(r.split);
    const auto c = adc::count_splits(s);
    std::cout << ojson{{"train", c.train}, {"eval", c.eval}, {"test", c.test}, {"none", c.none}}.dump() << "\n";
  });
}

// eval ---------------------------------------------------------------------

void add_eval(CLI::App& app, Common& common) {
  auto* ev = app.add_subcommand("eval", "Detection metrics and worst-case accuracy");
  ev->require_subcommand(1);
  static std::string report, truth, acc, delta = "0";

  auto* det = ev->add_subcommand("detect", "Precision, recall and F1 of a report");
  det->add_option("--report", report, "Report file")->required();
  det->add_option("--truth", truth, "Truth file")->required();
  det->add_option("--config", common.config, "Project config");
  det->callback([=, &common] {
    const auto rep = adc::load_report(report);
    const auto t = adc::load_truth(truth);
    std::vector<bool> flags, corrupted;
    for (const auto& e : rep.entries) {
      auto it = t.find(e.sample_id);
      if (it == t.end()) throw adc::ValidationError("truth has no entry for " + e.sample_id);
      flags.push_back(e.flag);
      corrupted.push_back(it->second);
    }
    const auto m = adc::detection_prf(flags, corrupted);
    ojson j{{"flagged", m.flagged},          {"corrupted", m.corrupted},
            {"hits", m.hits},                {"precision", opt_json(m.precision)},
            {"recall", opt_json(m.recall)}, {"f1", opt_json(m.f1)}};
    std::cout << j.dump() << "\n";
  });

  auto* dro = ev->add_subcommand("dro", "Worst-case weighted accuracy within a KL ball");
  dro->add_option("--acc", acc, "Per-class accuracies, one per line")->required();
  dro->add_option("--delta", delta, "Radius: number or inf");
  dro->add_option("--config", common.config, "Project config");
  dro->callback([=, &common] {
    const auto a = adc::load_values(acc);
    const auto r = adc::delta_worst_accuracy(a, adc::parse_delta(delta));
    ojson j{{"value", r.value}, {"weights", r.weights}, {"divergence", r.divergence}};
    std::cout << j.dump() << "\n";
  });
}

// embed, explain, run ------------------------------------------------------

void add_misc(CLI::App& app, Common& common) {
  static std::string file, manifest_path, artifact;
  auto* embed = app.add_subcommand("embed", "Embedding file utilities");
  embed->require_subcommand(1);
  auto* verify = embed->add_subcommand("verify", "Check an embedding file and its manifest alignment");
  verify->add_option("file", file, "Embedding file")->required();
  verify->add_option("--manifest", manifest_path, "Manifest file");
  verify->add_option("--config", common.config, "Project config");
  verify->callback([=, &common] {
    common.fill(manifest_path, common.cfg ? common.cfg->manifest : fs::path{});
    const auto m = adc::read_embeddings(file);
    std::cout << "ADCE v" << adc::kContainerVersion << ", N=" << m.n_rows() << ", d=" << m.dim() << "\n";
    if (!manifest_path.empty()) {
      const auto man = adc::load_manifest(manifest_path);
      const auto aligned = adc::align_embeddings(m, man);
      if (aligned.n_rows() != m.n_rows())
        std::cerr << "adc: warning: " << m.n_rows() - aligned.n_rows() << " rows not in the manifest\n";
      std::cout << "aligned " << aligned.n_rows() << " fetched samples\n";
    }
  });

  auto* ex = app.add_subcommand("explain", "Summarise an artifact and check its integrity");
  ex->add_option("file", artifact, "Artifact")->required();
  ex->add_option("--config", common.config, "Project config");
  ex->callback([=, &common] {
    const auto e = adc::explain(artifact);
    for (const auto& l : e.lines) std::cout << l << "\n";
    for (const auto& f : e.failures) std::cerr << "adc: integrity failure: " << f << "\n";
    if (!e.ok()) throw adc::ValidationError(std::to_string(e.failures.size()) + " integrity failure(s)");
  });

  static bool force = false;
  auto* run = app.add_subcommand("run", "Run design, collect, curate and subset from a config");
  run->add_option("--config", common.config, "Project config")->required();
  run->add_flag("--force", force, "Ignore stage stamps");
  run->callback([=, &common] {
    common.load();
    adc::PipelineOptions o;
    o.force = force;
    o.log = &std::cerr;
    const auto rep = adc::run_pipeline(*common.cfg, o);
    std::cout << rep.to_json();
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adc: dataset construction and curation"};
  app.require_subcommand(1);
  Common common;
  add_design(app, common);
  add_collect(app, common);
  add_curate(app, common);
  add_votes(app, common);
  add_subset(app, common);
  add_eval(app, common);
  add_misc(app, common);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const adc::Error& e) {
    std::cerr << "adc: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "adc: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
