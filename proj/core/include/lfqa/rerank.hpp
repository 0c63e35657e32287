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

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lfqa/analysis.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/retrieval.hpp"
#include "lfqa/services.hpp"

namespace lfqa {

/// Relevance model for (question, passage) pairs: a served cross-encoder or
/// an in-process matcher. Implementations must be safe to call from
/// several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string identity() const = 0;
  /// One score per passage, positionally aligned; higher is more relevant.
  virtual std::vector<double> score(const std::string& question,
                                    std::span<const Passage* const> passages) = 0;
};

/// Token recall of the passage against the question; needs no service.
std::unique_ptr<Scorer> make_lexical_scorer(const AnalyzedCorpus& corpus);

/// Sends pairs in batches of `batch_size`, one question per request.
std::unique_ptr<Scorer> make_service_scorer(ScoringService& service, std::string identity,
                                            std::size_t batch_size = 16);

struct RerankMetadata {
  std::string scorer;
  PoolSource pool_source = PoolSource::builtin_bm25;
  std::size_t k = 5;
  std::vector<std::string> failed_questions;  // excluded from the run

  bool operator==(const RerankMetadata&) const = default;
};

struct RerankedRun {
  RunFile run;
  RerankMetadata metadata;
};

/// Scores every pool passage, sorts descending (ties keep pool order) and
/// keeps the top k. A question whose scorer calls fail after retries is
/// listed in metadata.failed_questions and left out of the run.
RerankedRun rerank_pools(std::span<const CandidatePool> pools, const Corpus& corpus,
                         const Dataset& dataset, Scorer& scorer, std::size_t k, std::size_t jobs,
                         Diagnostics& diag);

/// First-stage order truncated to k.
RerankedRun passthrough_topk(std::span<const CandidatePool> pools, std::size_t k);

/// Run file plus "<path>.meta.json" with the metadata.
void write_reranked(const std::filesystem::path& path, const RerankedRun& reranked);
RerankMetadata load_rerank_metadata(const std::filesystem::path& run_path);

}  // namespace lfqa
