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

#include "lfqa/rerank.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "jsonl.hpp"
#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/parallel.hpp"

namespace lfqa {

using jsonl::Json;

namespace {

class LexicalScorer final : public Scorer {
 public:
  explicit LexicalScorer(const AnalyzedCorpus& corpus) : corpus_(corpus) {}

  std::string identity() const override { return "lexical_question_recall"; }

  std::vector<double> score(const std::string& question,
                            std::span<const Passage* const> passages) override {
    const TokenSet reference = TokenSet::from_text(question, corpus_.stopwords());
    std::vector<double> out;
    out.reserve(passages.size());
    for (const Passage* p : passages) {
      out.push_back(reference.empty() ? 0.0 : token_recall(corpus_.get(p->id).content, reference));
    }
    return out;
  }

 private:
  const AnalyzedCorpus& corpus_;
};

class ServiceScorer final : public Scorer {
 public:
  ServiceScorer(ScoringService& service, std::string identity, std::size_t batch_size)
      : service_(service), identity_(std::move(identity)), batch_(std::max<std::size_t>(1, batch_size)) {}

  std::string identity() const override { return identity_; }

  std::vector<double> score(const std::string& question,
                            std::span<const Passage* const> passages) override {
    std::vector<double> out;
    out.reserve(passages.size());
    for (std::size_t start = 0; start < passages.size(); start += batch_) {
      const std::size_t end = std::min(passages.size(), start + batch_);
      std::vector<ScoringPair> pairs;
      pairs.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        pairs.push_back(ScoringPair{question, passages[i]->title, passages[i]->text});
      }
      const auto scores = service_.score(pairs);
      out.insert(out.end(), scores.begin(), scores.end());
    }
    return out;
  }

 private:
  ScoringService& service_;
  std::string identity_;
  std::size_t batch_;
};

}  // namespace

std::unique_ptr<Scorer> make_lexical_scorer(const AnalyzedCorpus& corpus) {
  return std::make_unique<LexicalScorer>(corpus);
}

std::unique_ptr<Scorer> make_service_scorer(ScoringService& service, std::string identity,
                                            std::size_t batch_size) {
  return std::make_unique<ServiceScorer>(service, std::move(identity), batch_size);
}

RerankedRun rerank_pools(std::span<const CandidatePool> pools, const Corpus& corpus,
                         const Dataset& dataset, Scorer& scorer, std::size_t k, std::size_t jobs,
                         Diagnostics& diag) {
  if (k < 1) throw_invalid("rerank depth k must be >= 1");
  RerankedRun out;
  out.metadata.scorer = scorer.identity();
  out.metadata.k = k;
  if (!pools.empty()) out.metadata.pool_source = pools.front().source;

  std::vector<std::optional<QuestionRun>> results(pools.size());
  std::vector<char> failed(pools.size(), 0);
  parallel_for(pools.size(), jobs, [&](std::size_t q) {
    const CandidatePool& pool = pools[q];
    const QaInstance* instance = dataset.find(pool.question_id);
    if (instance == nullptr) {
      diag.warn("rerank: question '" + pool.question_id + "' is not in the dataset; skipped");
      failed[q] = 1;
      return;
    }
    std::vector<const Passage*> passages;
    passages.reserve(pool.size());
    for (const auto& e : pool.entries) passages.push_back(&corpus.at(e.passage_id));
    std::vector<double> scores;
    try {
      scores = scorer.score(instance->question, passages);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::service) throw;
      diag.warn("rerank: question '" + pool.question_id + "' failed: " + e.what());
      failed[q] = 1;
      return;
    }
    if (scores.size() != pool.size()) {
      diag.warn("rerank: scorer returned " + std::to_string(scores.size()) + " scores for " +
                std::to_string(pool.size()) + " passages of '" + pool.question_id + "'");
      failed[q] = 1;
      return;
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    QuestionRun run{pool.question_id, {}};
    const std::size_t depth = std::min(k, order.size());
    for (std::size_t r = 0; r < depth; ++r) {
      run.entries.push_back(RunEntry{pool.entries[order[r]].passage_id, scores[order[r]],
                                     static_cast<int>(r) + 1});
    }
    results[q] = std::move(run);
  });

  for (std::size_t q = 0; q < pools.size(); ++q) {
    if (failed[q]) {
      out.metadata.failed_questions.push_back(pools[q].question_id);
    } else {
      out.run.add(std::move(*results[q]));
    }
  }
  return out;
}

RerankedRun passthrough_topk(std::span<const CandidatePool> pools, std::size_t k) {
  if (k < 1) throw_invalid("rerank depth k must be >= 1");
  RerankedRun out;
  out.metadata.scorer = "passthrough";
  out.metadata.k = k;
  if (!pools.empty()) out.metadata.pool_source = pools.front().source;
  for (const auto& pool : pools) {
    QuestionRun run{pool.question_id, {}};
    const std::size_t depth = std::min(k, pool.size());
    for (std::size_t r = 0; r < depth; ++r) {
      run.entries.push_back(
          RunEntry{pool.entries[r].passage_id, pool.entries[r].score, static_cast<int>(r) + 1});
    }
    out.run.add(std::move(run));
  }
  return out;
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& run_path) {
  auto p = run_path;
  p += ".meta.json";
  return p;
}

}  // namespace

void write_reranked(const std::filesystem::path& path, const RerankedRun& reranked) {
  const auto& m = reranked.metadata;
  const Json meta{{"scorer", m.scorer},
                  {"pool_source", std::string(to_string(m.pool_source))},
                  {"k", m.k},
                  {"failed_questions", m.failed_questions}};
  write_run(path, reranked.run);
  write_file_atomic(meta_path(path), jsonl::canonical_dump(meta) + "\n");
}

RerankMetadata load_rerank_metadata(const std::filesystem::path& run_path) {
  const auto path = meta_path(run_path);
  Json meta;
  try {
    meta = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw_invalid(path.string() + ": malformed metadata (" + e.what() + ")");
  }
  jsonl::RecordReader r(meta, path.string(), 1);
  RerankMetadata m;
  m.scorer = r.required_string("scorer");
  const auto source = r.required_string("pool_source");
  if (source == "builtin_bm25") {
    m.pool_source = PoolSource::builtin_bm25;
  } else if (source == "ingested_run") {
    m.pool_source = PoolSource::ingested_run;
  } else {
    r.fail("unknown pool_source '" + source + "'");
  }
  m.k = static_cast<std::size_t>(r.required_int("k"));
  m.failed_questions = r.string_list("failed_questions");
  return m;
}

}  // namespace lfqa
