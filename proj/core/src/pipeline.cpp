// Copyright 2026 The lfqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lfqa/pipeline.hpp"

#include <cstdlib>
#include <map>
#include <memory>
#include <ostream>
#include <unordered_map>

#include "jsonl.hpp"
#include "lfqa/analysis.hpp"
#include "lfqa/error.hpp"
#include "lfqa/evalmetrics.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/matchers.hpp"
#include "lfqa/parallel.hpp"
#include "lfqa/rerank.hpp"

#ifndef LFQA_VERSION
#define LFQA_VERSION "0.0.0"
#endif

namespace lfqa {

namespace fs = std::filesystem;
using jsonl::Json;

std::string_view library_version() { return LFQA_VERSION; }

namespace {

// ---------------------------------------------------------------------------
// Config parsing

class Section {
 public:
  Section(const Json& json, std::string name) : json_(json), name_(std::move(name)) {
    if (!json_.is_object()) throw_invalid("config: '" + name_ + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : json_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) throw_invalid("config: unknown key '" + name_ + "." + key + "'");
    }
  }

  const Json* find(const char* key) const {
    auto it = json_.find(key);
    if (it == json_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <typename T>
  void read(const char* key, T& target) const {
    const Json* v = find(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> ||
                    std::is_same_v<T, int>) {
        if (!v->is_number_integer() || (v->is_number_integer() && v->get<long long>() < 0)) {
          throw_invalid("config: '" + name_ + "." + key + "' must be a non-negative integer");
        }
      }
      target = v->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw_invalid("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void read_path(const char* key, fs::path& target, const fs::path& base) const {
    std::string s;
    read(key, s);
    if (!s.empty()) target = fs::path(s).is_absolute() ? fs::path(s) : base / s;
  }

  Section child(const char* key) const {
    static const Json kEmpty = Json::object();
    const Json* v = find(key);
    return Section(v != nullptr ? *v : kEmpty, key);
  }

 private:
  const Json& json_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Shared inputs

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw_invalid(std::string(what) + " path is not configured");
  if (!fs::is_regular_file(path)) {
    throw_invalid(std::string(what) + " not found: " + path.string());
  }
}

class Workspace {
 public:
  Workspace(const PipelineConfig& config, Diagnostics& diag)
      : config_(config), diag_(diag), stopwords_(load_stopwords(config)) {}

  const PipelineConfig& config() const { return config_; }
  Diagnostics& diag() { return diag_; }
  const StopwordList& stopwords() const { return stopwords_; }

  const Corpus& corpus() {
    if (!corpus_) {
      require_file(config_.paths.corpus, "corpus");
      corpus_ = load_corpus(config_.paths.corpus, diag_);
      if (corpus_->empty()) throw Error(ErrorKind::no_work, "corpus is empty");
    }
    return *corpus_;
  }

  const Dataset& dataset() {
    if (!dataset_) {
      require_file(config_.paths.dataset, "dataset");
      dataset_ = load_dataset(config_.paths.dataset, diag_);
    }
    return *dataset_;
  }

  const AnalyzedCorpus& analyzed() {
    if (!analyzed_) analyzed_ = std::make_unique<AnalyzedCorpus>(corpus(), stopwords_);
    return *analyzed_;
  }

 private:
  static StopwordList load_stopwords(const PipelineConfig& config) {
    if (config.paths.stopwords.empty()) return StopwordList::builtin();
    require_file(config.paths.stopwords, "stopword list");
    return StopwordList::load(config.paths.stopwords);
  }

  const PipelineConfig& config_;
  Diagnostics& diag_;
  StopwordList stopwords_;
  std::optional<Corpus> corpus_;
  std::optional<Dataset> dataset_;
  std::unique_ptr<AnalyzedCorpus> analyzed_;
};

// ---------------------------------------------------------------------------
// Stages

bool index_matches(const InvertedIndex& index, Workspace& ws) {
  const auto& cfg = ws.config();
  return index.corpus_hash() == ws.corpus().content_hash() &&
         index.stopword_hash() == ws.stopwords().hash() &&
         index.tokenizer_version() == static_cast<std::uint32_t>(kTokenizerVersion) &&
         index.k1() == cfg.retrieval.k1 && index.b() == cfg.retrieval.b;
}

std::optional<InvertedIndex> load_current_index(Workspace& ws) {
  const auto path = ws.config().index_path();
  if (!fs::exists(path)) return std::nullopt;
  try {
    auto index = InvertedIndex::load(path);
    if (index_matches(index, ws)) return index;
  } catch (const Error& e) {
    ws.diag().warn("ignoring unreadable index " + path.string() + ": " + e.what());
  }
  return std::nullopt;
}

InvertedIndex build_index(Workspace& ws) {
  const auto& cfg = ws.config();
  return InvertedIndex::build(ws.corpus(), ws.stopwords(), cfg.retrieval.k1, cfg.retrieval.b,
                              cfg.jobs);
}

void print_index_stats(const InvertedIndex& index, std::ostream& out) {
  out << "passages: " << index.num_passages() << "\n"
      << "terms: " << index.num_terms() << "\n"
      << "average length: " << jsonl::format_double(index.average_length()) << "\n";
}

std::vector<CandidatePool> drop_unknown_passages(std::vector<CandidatePool> pools,
                                                 const Corpus& corpus, Diagnostics& diag) {
  std::size_t dropped = 0;
  for (auto& pool : pools) {
    dropped += std::erase_if(pool.entries,
                             [&](const PoolEntry& e) { return !corpus.contains(e.passage_id); });
  }
  if (dropped > 0) {
    diag.warn(std::to_string(dropped) + " pool entries reference passages missing from the "
              "corpus; dropped");
  }
  return pools;
}

std::vector<CandidatePool> compute_pools(Workspace& ws, const InvertedIndex* index) {
  const auto& cfg = ws.config();
  const auto& dataset = ws.dataset();
  if (cfg.pool_source() == PoolSource::ingested_run) {
    require_file(cfg.paths.ingest_run, "run");
    auto pools = ingest_run(load_run(cfg.paths.ingest_run), cfg.retrieval.pool_size, &dataset,
                            ws.diag());
    return drop_unknown_passages(std::move(pools), ws.corpus(), ws.diag());
  }

  std::optional<InvertedIndex> owned;
  if (index == nullptr) {
    owned = load_current_index(ws);
    if (!owned) {
      ws.diag().info("no up-to-date index at " + cfg.index_path().string() +
                     "; building in memory");
      owned = build_index(ws);
    }
    index = &*owned;
  }
  const auto& instances = dataset.instances();
  std::vector<CandidatePool> pools(instances.size());
  parallel_for(instances.size(), cfg.jobs, [&](std::size_t i) {
    pools[i] = index->retrieve(instances[i].id, instances[i].question, cfg.retrieval.pool_size,
                               ws.stopwords(), ws.diag());
  });
  return pools;
}

std::vector<CandidatePool> pools_from_run(const RunFile& run, PoolSource source) {
  std::vector<CandidatePool> pools;
  for (const auto& q : run.questions()) {
    CandidatePool pool{q.question_id, {}, source};
    for (const auto& e : q.entries) pool.entries.push_back({e.passage_id, e.score});
    pools.push_back(std::move(pool));
  }
  return pools;
}

struct EndpointServices {
  std::unique_ptr<EmbeddingService> embedding;
  std::unique_ptr<LogProbService> logprob;
};

std::unique_ptr<Matcher> make_matcher(Workspace& ws, EndpointServices& services) {
  const auto& cfg = ws.config();
  const auto strategy = cfg.mine.silver.strategy;
  switch (strategy) {
    case Strategy::lexical_recall:
    case Strategy::jaccard:
    case Strategy::rouge_l:
      return make_lexical_matcher(ws.analyzed(), strategy);
    case Strategy::semantic: {
      if (cfg.services.embedding_url.empty()) throw_invalid("no embedding service configured");
      services.embedding = make_http_embedding_service(Endpoint::parse(cfg.services.embedding_url),
                                                       cfg.services.retry);
      return make_semantic_matcher(ws.corpus(), *services.embedding,
                                   {cfg.services.batch_size, cfg.services.cosine});
    }
    case Strategy::perplexity: {
      if (cfg.services.logprob_url.empty()) throw_invalid("no log-prob service configured");
      services.logprob = make_http_logprob_service(Endpoint::parse(cfg.services.logprob_url),
                                                   cfg.services.retry);
      PerplexityOptions options;
      options.prompt_template = cfg.mine.prompt_template;
      options.k = cfg.mine.silver.k;
      options.seed = cfg.seed;
      options.resample_per_candidate = cfg.mine.context_resample;
      options.jobs = 1;
      return make_perplexity_matcher(ws.corpus(), *services.logprob, options, ws.diag());
    }
  }
  throw_invalid("unsupported strategy");
}

SilverConfig effective_silver(const PipelineConfig& cfg) {
  SilverConfig s = cfg.mine.silver;
  s.seed = cfg.seed;
  s.pool_size = cfg.retrieval.pool_size;
  return s;
}

struct Skipped {
  std::string question_id;
  std::string reason;
  bool service = false;
};

struct MineOutcome {
  std::vector<SilverSelection> selections;
  std::vector<Skipped> skipped;
};

MineOutcome mine_pools(Workspace& ws, std::span<const CandidatePool> pools) {
  const auto& cfg = ws.config();
  const auto silver = effective_silver(cfg);
  silver.validate();
  const auto& dataset = ws.dataset();
  const auto& analyzed = ws.analyzed();

  EndpointServices services;
  std::unique_ptr<Matcher> matcher;
  if (cfg.mine.mode != SelectionMode::da_only) matcher = make_matcher(ws, services);

  std::unordered_map<std::string, const CandidatePool*> by_question;
  for (const auto& p : pools) by_question.emplace(p.question_id, &p);

  const auto& instances = dataset.instances();
  std::vector<std::optional<SilverSelection>> results(instances.size());
  std::vector<std::optional<Skipped>> skips(instances.size());
  parallel_for(instances.size(), cfg.jobs, [&](std::size_t i) {
    const auto& instance = instances[i];
    auto it = by_question.find(instance.id);
    if (it == by_question.end() || it->second->empty()) {
      skips[i] = Skipped{instance.id, "empty candidate pool"};
      return;
    }
    const CandidatePool& pool = *it->second;
    try {
      switch (cfg.mine.mode) {
        case SelectionMode::da_only:
          results[i] = select_da_only(pool, instance, analyzed, silver, ws.diag());
          break;
        case SelectionMode::silver: {
          const auto scores = score_against_lfas(*matcher, pool, instance, cfg.mine.silver.lfa_policy);
          results[i] = select_silver(pool, instance, scores, analyzed, silver, ws.diag());
          break;
        }
        case SelectionMode::lfa_only: {
          const auto scores = score_against_lfas(*matcher, pool, instance, cfg.mine.silver.lfa_policy);
          results[i] = select_lfa_only(pool, instance, scores, analyzed, silver, ws.diag());
          break;
        }
      }
    } catch (const Error& e) {
      skips[i] = Skipped{instance.id, e.what(), e.kind() == ErrorKind::service};
    }
  });

  MineOutcome outcome;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (results[i]) outcome.selections.push_back(std::move(*results[i]));
    if (skips[i]) outcome.skipped.push_back(std::move(*skips[i]));
  }
  return outcome;
}

void write_mine_outputs(Workspace& ws, const MineOutcome& outcome) {
  const auto& cfg = ws.config();
  Json skipped = Json::array();
  for (const auto& s : outcome.skipped) {
    skipped.push_back({{"question_id", s.question_id}, {"reason", s.reason}});
  }
  write_file_atomic(cfg.output("mine.skipped.json"),
                    jsonl::canonical_dump({{"seed", cfg.seed}, {"skipped", skipped}}) + "\n");
  for (const auto& s : outcome.skipped) {
    ws.diag().warn("skipped question '" + s.question_id + "': " + s.reason);
  }

  if (outcome.selections.empty()) {
    const bool all_service =
        !outcome.skipped.empty() &&
        std::all_of(outcome.skipped.begin(), outcome.skipped.end(),
                    [](const Skipped& s) { return s.service; });
    if (all_service) throw Error(ErrorKind::service, "every question failed on a model service");
    throw Error(ErrorKind::no_work, "no question could be mined");
  }

  const auto silver = effective_silver(cfg);
  write_silver(cfg.output("silver.jsonl"), outcome.selections);
  emit_training_data(outcome.selections, ws.dataset(), ws.corpus(), silver,
                     cfg.output("training_pairs.jsonl"), ws.diag());

  Json meta = {{"mode", to_string(cfg.mine.mode)},
               {"strategy", to_string(silver.strategy)},
               {"lfa_policy", to_string(silver.lfa_policy)},
               {"k", silver.k},
               {"positives_per_question", silver.positives_per_question},
               {"negatives_per_question", silver.negatives_per_question},
               {"pool_size", silver.pool_size},
               {"pool_source", to_string(cfg.pool_source())},
               {"seed", cfg.seed},
               {"stopword_hash", ws.stopwords().hash()},
               {"tokenizer_version", kTokenizerVersion},
               {"questions", outcome.selections.size()},
               {"skipped", outcome.skipped.size()}};
  if (silver.strategy == Strategy::perplexity && cfg.mine.mode != SelectionMode::da_only) {
    meta["template_version"] = template_version(cfg.mine.prompt_template);
    meta["context_resample"] = cfg.mine.context_resample;
  }
  write_file_atomic(cfg.output("silver.meta.json"), jsonl::canonical_dump(meta) + "\n");
}

RerankedRun rerank_stage(Workspace& ws, std::span<const CandidatePool> pools) {
  const auto& cfg = ws.config();
  const auto& scorer_name = cfg.rerank.scorer;
  RerankedRun result;
  if (scorer_name == "passthrough") {
    result = passthrough_topk(pools, cfg.rerank.k);
  } else if (scorer_name == "lexical") {
    auto scorer = make_lexical_scorer(ws.analyzed());
    result = rerank_pools(pools, ws.corpus(), ws.dataset(), *scorer, cfg.rerank.k, cfg.jobs,
                          ws.diag());
  } else if (scorer_name == "service") {
    if (cfg.services.scorer_url.empty()) throw_invalid("no scoring service configured");
    const auto endpoint = Endpoint::parse(cfg.services.scorer_url);
    auto service = make_http_scoring_service(endpoint, cfg.services.retry);
    auto scorer = make_service_scorer(*service, "service:" + endpoint.url(),
                                      cfg.services.batch_size);
    result = rerank_pools(pools, ws.corpus(), ws.dataset(), *scorer, cfg.rerank.k, cfg.jobs,
                          ws.diag());
  } else {
    throw_invalid("unknown re-ranking scorer '" + scorer_name + "'");
  }
  result.metadata.pool_source = cfg.pool_source();

  const bool nonempty = std::any_of(pools.begin(), pools.end(),
                                    [](const CandidatePool& p) { return !p.empty(); });
  if (nonempty && result.run.size() == 0 && !result.metadata.failed_questions.empty()) {
    throw Error(ErrorKind::service, "re-ranking failed for every question");
  }
  write_reranked(cfg.output("rerank.jsonl"), result);
  return result;
}

fs::path default_eval_run(const PipelineConfig& cfg) {
  if (!cfg.paths.eval_run.empty()) return cfg.paths.eval_run;
  return cfg.rerank.enabled ? cfg.output("rerank.jsonl") : cfg.output("pools.jsonl");
}

MetricsReport eval_stage(Workspace& ws, std::ostream& out) {
  const auto& cfg = ws.config();
  const auto run_path = default_eval_run(cfg);
  require_file(run_path, "run");
  const auto run = load_run(run_path);

  std::optional<std::vector<GeneratedAnswer>> answers;
  std::optional<std::vector<Extraction>> extractions;
  std::optional<std::vector<Extraction>> conv;
  if (!cfg.paths.answers.empty()) {
    require_file(cfg.paths.answers, "answers");
    answers = load_answers(cfg.paths.answers, ws.diag());
  }
  if (!cfg.paths.extractions.empty()) {
    require_file(cfg.paths.extractions, "extractions");
    extractions = load_extractions(cfg.paths.extractions);
  }
  if (!cfg.paths.conv_extractions.empty()) {
    require_file(cfg.paths.conv_extractions, "conversational extractions");
    conv = load_extractions(cfg.paths.conv_extractions);
  }

  EvalInputs inputs;
  inputs.answers = answers ? &*answers : nullptr;
  inputs.extractions = extractions ? &*extractions : nullptr;
  inputs.conv_extractions = conv ? &*conv : nullptr;
  auto meta_path = run_path;
  meta_path += ".meta.json";
  if (fs::exists(meta_path)) inputs.excluded_questions = load_rerank_metadata(run_path).failed_questions;

  auto per_question =
      evaluate_run(run, ws.dataset(), ws.analyzed(), cfg.eval.k, inputs, ws.diag());
  ReportConfig rc;
  rc.k = cfg.eval.k;
  rc.stopword_hash = ws.stopwords().hash();
  rc.seed = cfg.seed;
  rc.run_label = run_path.filename().string();
  rc.micro = cfg.eval.micro;
  auto report = aggregate_report(std::move(per_question), rc, inputs.excluded_questions);
  write_report(cfg.output("report"), report);
  out << render_report_table(report);
  return report;
}

void ensure_output_dir(const PipelineConfig& cfg) {
  if (cfg.paths.output_dir.empty()) throw_invalid("output directory is not configured");
  std::error_code ec;
  fs::create_directories(cfg.paths.output_dir, ec);
  if (ec) {
    throw_invalid("cannot create output directory " + cfg.paths.output_dir.string() + ": " +
                  ec.message());
  }
}

// ---------------------------------------------------------------------------
// Manifest

std::string optional_file_hash(const fs::path& path) {
  if (path.empty()) return "";
  require_file(path, "input");
  return sha256_file(path);
}

class Manifest {
 public:
  Manifest(const PipelineConfig& cfg, const StopwordList& stopwords)
      : cfg_(cfg), path_(cfg.output("manifest.json")) {
    if (fs::exists(path_)) {
      try {
        const auto previous = Json::parse(read_text_file(path_));
        if (previous.contains("stages") && previous["stages"].is_object()) {
          stages_ = previous["stages"];
        }
      } catch (const std::exception&) {
        stages_ = Json::object();
      }
    }
    header_ = {{"lfqa_version", library_version()},
               {"seed", cfg.seed},
               {"stopword_hash", stopwords.hash()},
               {"tokenizer_version", kTokenizerVersion}};
  }

  bool fresh(const std::string& stage, const std::string& fingerprint) const {
    auto it = stages_.find(stage);
    if (it == stages_.end() || (*it)["fingerprint"] != fingerprint) return false;
    for (const auto& [name, digest] : (*it)["outputs"].items()) {
      const auto path = cfg_.paths.output_dir / name;
      if (!fs::is_regular_file(path) || sha256_file(path) != digest.get<std::string>()) {
        return false;
      }
    }
    return true;
  }

  std::string output_hash(const std::string& stage, const std::string& name) const {
    return stages_.at(stage).at("outputs").at(name).get<std::string>();
  }

  void record(const std::string& stage, const std::string& fingerprint,
              std::initializer_list<fs::path> outputs) {
    Json files = Json::object();
    for (const auto& p : outputs) {
      files[p.lexically_relative(cfg_.paths.output_dir).generic_string()] = sha256_file(p);
    }
    stages_[stage] = {{"fingerprint", fingerprint}, {"outputs", std::move(files)}};
    Json doc = header_;
    doc["stages"] = stages_;
    write_file_atomic(path_, jsonl::canonical_dump(doc) + "\n");
  }

 private:
  const PipelineConfig& cfg_;
  fs::path path_;
  Json header_;
  Json stages_ = Json::object();
};

std::string fingerprint(const Json& inputs) { return sha256_hex(jsonl::canonical_dump(inputs)); }

}  // namespace

// ---------------------------------------------------------------------------
// PipelineConfig

PipelineConfig PipelineConfig::parse(std::string_view text, const fs::path& base_dir) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_invalid(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  const Section top(root, "config");
  top.allow({"paths", "retrieval", "silver", "services", "rerank", "eval", "seed", "jobs",
             "log_level"});

  const auto paths = top.child("paths");
  paths.allow({"corpus", "dataset", "output_dir", "index", "stopwords", "ingest_run", "answers",
               "extractions", "conv_extractions", "eval_run"});
  paths.read_path("corpus", cfg.paths.corpus, base_dir);
  paths.read_path("dataset", cfg.paths.dataset, base_dir);
  paths.read_path("output_dir", cfg.paths.output_dir, base_dir);
  paths.read_path("index", cfg.paths.index, base_dir);
  paths.read_path("stopwords", cfg.paths.stopwords, base_dir);
  paths.read_path("ingest_run", cfg.paths.ingest_run, base_dir);
  paths.read_path("answers", cfg.paths.answers, base_dir);
  paths.read_path("extractions", cfg.paths.extractions, base_dir);
  paths.read_path("conv_extractions", cfg.paths.conv_extractions, base_dir);
  paths.read_path("eval_run", cfg.paths.eval_run, base_dir);

  const auto retrieval = top.child("retrieval");
  retrieval.allow({"pool_size", "k1", "b", "builtin"});
  retrieval.read("pool_size", cfg.retrieval.pool_size);
  retrieval.read("k1", cfg.retrieval.k1);
  retrieval.read("b", cfg.retrieval.b);
  if (retrieval.find("builtin") != nullptr) {
    bool builtin = true;
    retrieval.read("builtin", builtin);
    cfg.builtin_retrieval = builtin;
  }

  const auto silver = top.child("silver");
  silver.allow({"mode", "strategy", "k", "positives", "negatives", "lfa_policy",
                "context_resample", "prompt_template"});
  std::string name;
  if (silver.find("mode") != nullptr) {
    silver.read("mode", name);
    cfg.mine.mode = parse_selection_mode(name);
  }
  if (silver.find("strategy") != nullptr) {
    silver.read("strategy", name);
    cfg.mine.silver.strategy = parse_strategy(name);
  }
  if (silver.find("lfa_policy") != nullptr) {
    silver.read("lfa_policy", name);
    cfg.mine.silver.lfa_policy = parse_lfa_policy(name);
  }
  silver.read("k", cfg.mine.silver.k);
  silver.read("positives", cfg.mine.silver.positives_per_question);
  silver.read("negatives", cfg.mine.silver.negatives_per_question);
  silver.read("context_resample", cfg.mine.context_resample);
  silver.read("prompt_template", cfg.mine.prompt_template);

  const auto services = top.child("services");
  services.allow({"embedding_url", "logprob_url", "scorer_url", "batch_size", "max_attempts",
                  "backoff_ms", "timeout_ms", "cosine"});
  services.read("embedding_url", cfg.services.embedding_url);
  services.read("logprob_url", cfg.services.logprob_url);
  services.read("scorer_url", cfg.services.scorer_url);
  services.read("batch_size", cfg.services.batch_size);
  services.read("max_attempts", cfg.services.retry.max_attempts);
  std::size_t ms = static_cast<std::size_t>(cfg.services.retry.initial_backoff.count());
  services.read("backoff_ms", ms);
  cfg.services.retry.initial_backoff = std::chrono::milliseconds(ms);
  ms = static_cast<std::size_t>(cfg.services.retry.timeout.count());
  services.read("timeout_ms", ms);
  cfg.services.retry.timeout = std::chrono::milliseconds(ms);
  services.read("cosine", cfg.services.cosine);

  const auto rerank = top.child("rerank");
  rerank.allow({"enabled", "scorer", "k"});
  rerank.read("enabled", cfg.rerank.enabled);
  rerank.read("scorer", cfg.rerank.scorer);
  rerank.read("k", cfg.rerank.k);

  const auto eval = top.child("eval");
  eval.allow({"k", "micro"});
  eval.read("k", cfg.eval.k);
  eval.read("micro", cfg.eval.micro);

  top.read("seed", cfg.seed);
  top.read("jobs", cfg.jobs);
  if (top.find("log_level") != nullptr) {
    top.read("log_level", name);
    cfg.log_level = parse_log_level(name);
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw_invalid("config not found: " + path.string());
  return parse(read_text_file(path), path.parent_path());
}

void PipelineConfig::apply_environment() {
  auto override_from = [](const char* var, std::string& target) {
    const char* value = std::getenv(var);
    if (value != nullptr && *value != '\0') target = value;
  };
  override_from("LFQA_EMBEDDING_URL", services.embedding_url);
  override_from("LFQA_LOGPROB_URL", services.logprob_url);
  override_from("LFQA_SCORER_URL", services.scorer_url);
}

void PipelineConfig::validate() const {
  retrieval.validate();
  effective_silver(*this).validate();
  if (jobs == 0) throw_invalid("jobs must be at least 1");
  if (eval.k == 0) throw_invalid("eval.k must be at least 1");
  if (rerank.k == 0) throw_invalid("rerank.k must be at least 1");
  if (services.batch_size == 0) throw_invalid("services.batch_size must be at least 1");
  if (services.retry.max_attempts < 1) throw_invalid("services.max_attempts must be at least 1");
  if (rerank.scorer != "passthrough" && rerank.scorer != "lexical" && rerank.scorer != "service") {
    throw_invalid("unknown re-ranking scorer '" + rerank.scorer + "'");
  }
  pool_source();
}

PoolSource PipelineConfig::pool_source() const {
  if (paths.ingest_run.empty()) {
    if (builtin_retrieval == false) throw_invalid("no pool source: builtin retrieval is off and no run is ingested");
    return PoolSource::builtin_bm25;
  }
  if (builtin_retrieval == true) {
    throw_invalid("ambiguous pool source: builtin retrieval and ingested run " +
                  paths.ingest_run.string() + " are both configured");
  }
  return PoolSource::ingested_run;
}

fs::path PipelineConfig::output(std::string_view name) const { return paths.output_dir / name; }

fs::path PipelineConfig::index_path() const {
  return paths.index.empty() ? output("index.bin") : paths.index;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_index(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  Workspace ws(config, diag);
  ws.corpus();
  if (auto current = load_current_index(ws)) {
    out << "index up to date: " << config.index_path().string() << "\n";
    print_index_stats(*current, out);
    return 0;
  }
  const auto index = build_index(ws);
  fs::create_directories(config.index_path().parent_path());
  index.save(config.index_path());
  out << "wrote index " << config.index_path().string() << "\n";
  print_index_stats(index, out);
  return 0;
}

int cmd_retrieve(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  ensure_output_dir(config);
  Workspace ws(config, diag);
  const auto pools = compute_pools(ws, nullptr);
  write_run(config.output("pools.jsonl"), pools_to_run(pools));
  out << "wrote " << pools.size() << " candidate pools to "
      << config.output("pools.jsonl").string() << "\n";
  return 0;
}

int cmd_mine(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  ensure_output_dir(config);
  Workspace ws(config, diag);
  const auto pools = compute_pools(ws, nullptr);
  const auto outcome = mine_pools(ws, pools);
  write_mine_outputs(ws, outcome);
  out << "mined " << outcome.selections.size() << " question(s), skipped "
      << outcome.skipped.size() << "\n";
  return 0;
}

int cmd_rerank(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  ensure_output_dir(config);
  Workspace ws(config, diag);
  const auto pools = compute_pools(ws, nullptr);
  const auto result = rerank_stage(ws, pools);
  out << "re-ranked " << result.run.size() << " question(s) with " << result.metadata.scorer;
  if (!result.metadata.failed_questions.empty()) {
    out << ", " << result.metadata.failed_questions.size() << " failed";
  }
  out << "\n";
  return 0;
}

int cmd_eval(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  ensure_output_dir(config);
  Workspace ws(config, diag);
  eval_stage(ws, out);
  return 0;
}

int cmd_pipeline(const PipelineConfig& config, std::ostream& out, Diagnostics& diag) {
  config.validate();
  ensure_output_dir(config);
  Workspace ws(config, diag);
  Manifest manifest(config, ws.stopwords());
  const auto source = config.pool_source();
  require_file(config.paths.corpus, "corpus");
  const auto corpus_hash = sha256_file(config.paths.corpus);
  require_file(config.paths.dataset, "dataset");
  const auto dataset_hash = sha256_file(config.paths.dataset);

  auto skip_notice = [&](const char* stage) { out << "[" << stage << "] up to date\n"; };

  // index
  std::optional<InvertedIndex> index;
  Json upstream;
  if (source == PoolSource::builtin_bm25) {
    const auto fp = fingerprint({{"stage", "index"},
                                 {"corpus", corpus_hash},
                                 {"stopwords", ws.stopwords().hash()},
                                 {"tokenizer_version", kTokenizerVersion},
                                 {"k1", config.retrieval.k1},
                                 {"b", config.retrieval.b}});
    if (manifest.fresh("index", fp) && (index = load_current_index(ws))) {
      skip_notice("index");
    } else {
      index = build_index(ws);
      fs::create_directories(config.index_path().parent_path());
      index->save(config.index_path());
      manifest.record("index", fp, {config.index_path()});
      out << "[index] " << index->num_passages() << " passages, " << index->num_terms()
          << " terms\n";
    }
    upstream = sha256_file(config.index_path());
  } else {
    require_file(config.paths.ingest_run, "run");
    upstream = sha256_file(config.paths.ingest_run);
  }

  // retrieve
  const auto pools_path = config.output("pools.jsonl");
  std::vector<CandidatePool> pools;
  {
    const auto fp = fingerprint({{"stage", "retrieve"},
                                 {"source", to_string(source)},
                                 {"upstream", upstream},
                                 {"dataset", dataset_hash},
                                 {"pool_size", config.retrieval.pool_size}});
    if (manifest.fresh("retrieve", fp)) {
      skip_notice("retrieve");
      pools = pools_from_run(load_run(pools_path), source);
    } else {
      pools = compute_pools(ws, index ? &*index : nullptr);
      write_run(pools_path, pools_to_run(pools));
      manifest.record("retrieve", fp, {pools_path});
      out << "[retrieve] " << pools.size() << " candidate pools\n";
    }
  }
  const auto pools_hash = sha256_file(pools_path);

  // mine
  {
    const auto silver = effective_silver(config);
    Json params = {{"stage", "mine"},
                   {"pools", pools_hash},
                   {"dataset", dataset_hash},
                   {"corpus", corpus_hash},
                   {"stopwords", ws.stopwords().hash()},
                   {"mode", to_string(config.mine.mode)},
                   {"strategy", to_string(silver.strategy)},
                   {"lfa_policy", to_string(silver.lfa_policy)},
                   {"k", silver.k},
                   {"positives", silver.positives_per_question},
                   {"negatives", silver.negatives_per_question},
                   {"seed", config.seed}};
    if (silver.strategy == Strategy::perplexity) {
      params["template"] = template_version(config.mine.prompt_template);
      params["context_resample"] = config.mine.context_resample;
      params["endpoint"] = config.services.logprob_url;
    } else if (silver.strategy == Strategy::semantic) {
      params["endpoint"] = config.services.embedding_url;
      params["cosine"] = config.services.cosine;
    }
    const auto fp = fingerprint(params);
    if (manifest.fresh("mine", fp)) {
      skip_notice("mine");
    } else {
      const auto outcome = mine_pools(ws, pools);
      write_mine_outputs(ws, outcome);
      manifest.record("mine", fp,
                      {config.output("silver.jsonl"), config.output("silver.meta.json"),
                       config.output("training_pairs.jsonl"), config.output("mine.skipped.json")});
      out << "[mine] " << outcome.selections.size() << " question(s) mined, "
          << outcome.skipped.size() << " skipped\n";
    }
  }

  // rerank
  if (config.rerank.enabled) {
    const auto fp = fingerprint({{"stage", "rerank"},
                                 {"pools", pools_hash},
                                 {"dataset", dataset_hash},
                                 {"corpus", corpus_hash},
                                 {"scorer", config.rerank.scorer},
                                 {"endpoint", config.rerank.scorer == "service"
                                                  ? config.services.scorer_url
                                                  : std::string()},
                                 {"k", config.rerank.k}});
    if (manifest.fresh("rerank", fp)) {
      skip_notice("rerank");
    } else {
      const auto result = rerank_stage(ws, pools);
      auto meta = config.output("rerank.jsonl");
      meta += ".meta.json";
      manifest.record("rerank", fp, {config.output("rerank.jsonl"), meta});
      out << "[rerank] " << result.run.size() << " question(s) with " << result.metadata.scorer
          << "\n";
    }
  }

  // eval
  {
    const auto run_path = default_eval_run(config);
    require_file(run_path, "run");
    auto meta_path = run_path;
    meta_path += ".meta.json";
    const auto fp = fingerprint({{"stage", "eval"},
                                 {"run", sha256_file(run_path)},
                                 {"run_meta", fs::exists(meta_path) ? sha256_file(meta_path) : ""},
                                 {"run_label", run_path.filename().string()},
                                 {"dataset", dataset_hash},
                                 {"corpus", corpus_hash},
                                 {"stopwords", ws.stopwords().hash()},
                                 {"answers", optional_file_hash(config.paths.answers)},
                                 {"extractions", optional_file_hash(config.paths.extractions)},
                                 {"conv_extractions",
                                  optional_file_hash(config.paths.conv_extractions)},
                                 {"k", config.eval.k},
                                 {"micro", config.eval.micro},
                                 {"seed", config.seed}});
    if (manifest.fresh("eval", fp)) {
      skip_notice("eval");
      out << read_text_file(config.output("report.txt"));
    } else {
      eval_stage(ws, out);
      manifest.record("eval", fp,
                      {config.output("report.json"), config.output("report.txt"),
                       config.output("report.per_turn.csv")});
    }
  }
  out << "manifest: " << config.output("manifest.json").string() << "\n";
  return 0;
}

int report_failure(const std::exception& e, std::ostream& err) {
  if (const auto* error = dynamic_cast<const Error*>(&e)) {
    err << "error: " << error->what() << "\n";
    return exit_code(error->kind());
  }
  err << "internal error: " << e.what() << "\n";
  return 1;
}

}  // namespace lfqa
