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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/analysis.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/matchers.hpp"
#include "lfqa/retrieval.hpp"

namespace lfqa {

/// How questions with several reference LFAs are matched.
enum class LfaPolicy {
  first,               // only the first LFA
  concatenate,         // all LFAs joined into one target
  best_per_candidate,  // each LFA separately, max per passage
};

enum class SelectionMode { silver, da_only, lfa_only };

std::string_view to_string(LfaPolicy policy);
LfaPolicy parse_lfa_policy(std::string_view name);
std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view name);

struct SilverConfig {
  std::size_t k = 5;
  std::size_t pool_size = 100;
  std::size_t negatives_per_question = 50;
  std::size_t positives_per_question = 5;
  Strategy strategy = Strategy::lexical_recall;
  std::uint64_t seed = 0;
  LfaPolicy lfa_policy = LfaPolicy::first;

  /// 1 <= positives_per_question <= k <= pool_size, negatives >= 1.
  void validate() const;
};

struct SilverSelection {
  std::string question_id;
  std::vector<std::string> positives;  // best first, at most k
  std::vector<std::string> negatives;  // sampled from pool - positives
  std::map<std::string, MatchScore> scores;
  /// Direct answer -> best positive containing it, or none if uncovered.
  std::map<std::string, std::optional<std::string>> da_coverage;
  std::string strategy;                 // matcher strategy, or "question_recall"
  std::uint64_t seed = 0;

  bool operator==(const SilverSelection&) const = default;
};

/// Re-ranker training example. Model-side token assembly
/// ("[CLS] question [SEP] title [SEP] text") is left to the trainer.
struct TrainingPair {
  std::string question;
  std::string passage_title;
  std::string passage_text;
  int label = 0;

  bool operator==(const TrainingPair&) const = default;
};

/// Scores a pool against the instance's LFAs under `policy`. Throws
/// invalid_input when the instance has no LFA.
std::vector<MatchScore> score_against_lfas(Matcher& matcher, const CandidatePool& pool,
                                           const QaInstance& instance, LfaPolicy policy);

/// Combined selection. Every direct answer contained in some pool passage
/// forces its highest-scoring containing passage into the positives; the
/// remaining slots up to k are filled by LFA score. When more than k
/// passages are forced, the k best-scoring ones are kept. Ties are broken
/// by pool rank, then passage id. Negatives are a seeded uniform sample of
/// the rest of the pool.
SilverSelection select_silver(const CandidatePool& pool, const QaInstance& instance,
                              std::span<const MatchScore> scores, const AnalyzedCorpus& corpus,
                              const SilverConfig& config, Diagnostics& diag);

/// Passages containing any direct answer, ordered by token recall against
/// the question and truncated to k. Throws invalid_input when the instance
/// has no direct answers.
SilverSelection select_da_only(const CandidatePool& pool, const QaInstance& instance,
                               const AnalyzedCorpus& corpus, const SilverConfig& config,
                               Diagnostics& diag);

/// Top k by LFA score alone.
SilverSelection select_lfa_only(const CandidatePool& pool, const QaInstance& instance,
                                std::span<const MatchScore> scores, const AnalyzedCorpus& corpus,
                                const SilverConfig& config, Diagnostics& diag);

/// Per selection: the first positives_per_question positives with label 1,
/// then the negatives with label 0. Output follows dataset order. Throws
/// invalid_input for a passage id missing from the corpus.
std::vector<TrainingPair> training_pairs(std::span<const SilverSelection> selections,
                                         const Dataset& dataset, const Corpus& corpus,
                                         const SilverConfig& config, Diagnostics& diag);

std::size_t emit_training_data(std::span<const SilverSelection> selections,
                               const Dataset& dataset, const Corpus& corpus,
                               const SilverConfig& config, const std::filesystem::path& path,
                               Diagnostics& diag);

std::string serialize_training_pairs(std::span<const TrainingPair> pairs);

std::string serialize_silver(std::span<const SilverSelection> selections);
void write_silver(const std::filesystem::path& path, std::span<const SilverSelection> selections);
std::vector<SilverSelection> load_silver(const std::filesystem::path& path);

}  // namespace lfqa
