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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/analysis.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/retrieval.hpp"
#include "lfqa/services.hpp"

namespace lfqa {

enum class Strategy { lexical_recall, jaccard, rouge_l, semantic, perplexity };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

/// Match quality of one candidate against a target answer. Higher is
/// always better, for every strategy. A candidate whose service response
/// was unusable is marked `failed` and ranks below everything else.
struct MatchScore {
  std::string passage_id;
  double score = 0.0;
  Strategy strategy = Strategy::lexical_recall;
  bool failed = false;

  bool operator==(const MatchScore&) const = default;
};

using EmbeddingVector = std::vector<double>;

enum class LexicalVariant { recall, jaccard, rouge_l };

/// One score per pool entry, in pool order. `recall` is
/// |tokens(p) ∩ tokens(lfa)| / |tokens(lfa)| over stopword-free token sets;
/// `rouge_l` reports the F1 component with the passage as candidate.
/// Throws invalid_input if the LFA has no usable tokens.
std::vector<MatchScore> score_lexical(const CandidatePool& pool, const AnalyzedCorpus& corpus,
                                      std::string_view lfa, LexicalVariant variant);

struct SemanticOptions {
  std::size_t batch_size = 16;
  bool cosine = false;  // off: plain dot product
};

/// Passages are embedded as "title. text". Dimension mismatches raise
/// ErrorKind::service.
std::vector<MatchScore> score_semantic(const CandidatePool& pool, const Corpus& corpus,
                                       std::string_view lfa, EmbeddingService& service,
                                       const SemanticOptions& options = {});

double dot(std::span<const double> a, std::span<const double> b);

inline constexpr std::string_view kDefaultPerplexityTemplate =
    "Question: {question}\n\n{context}{candidate}\nAnswer: ";

/// Prompt material for scoring one candidate by answer likelihood.
struct PerplexityContext {
  std::string prompt_template;
  std::vector<std::string> context_sample;  // k-1 other pool passages
  std::uint64_t seed = 0;
};

struct PerplexityOptions {
  std::string prompt_template{kDefaultPerplexityTemplate};
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool resample_per_candidate = false;
  std::size_t jobs = 1;
};

/// Draws the k-1 context passages for `candidate_id`. By default one
/// ordering is drawn per question and every candidate takes the first k-1
/// entries of it that are not itself, so candidates outside the sample all
/// see the same context.
PerplexityContext draw_perplexity_context(const CandidatePool& pool,
                                          std::string_view candidate_id,
                                          const PerplexityOptions& options);

/// Substitutes {question}, {context} and {candidate}. Each passage renders
/// as "Title: <title>\n<text>\n\n".
std::string render_prompt(std::string_view prompt_template, std::string_view question,
                          std::span<const Passage* const> context, const Passage& candidate);

/// Short identifier of a prompt template for output metadata.
std::string template_version(std::string_view prompt_template);

/// -Σ log P(t_j | prompt, t_<j): the negative log-likelihood of the target.
double answer_cost(std::span<const TokenLogProb> logprobs);

/// score = -answer_cost, so better-supported candidates score higher. The
/// returned tokens must concatenate to exactly the LFA; otherwise the
/// candidate is marked failed with a warning. A pool smaller than k yields
/// a shorter context and a warning.
std::vector<MatchScore> score_perplexity(const CandidatePool& pool, const Corpus& corpus,
                                         std::string_view question, std::string_view lfa,
                                         const PerplexityOptions& options,
                                         LogProbService& service, Diagnostics& diag);

/// Token recall of each passage against the question. A question with no
/// content tokens scores 0 everywhere and raises a warning.
std::vector<MatchScore> question_recall(const CandidatePool& pool, const AnalyzedCorpus& corpus,
                                        std::string_view question, Diagnostics& diag);

/// Pluggable scorer of a pool against one long-form answer.
class Matcher {
 public:
  virtual ~Matcher() = default;
  virtual Strategy strategy() const = 0;
  virtual std::vector<MatchScore> score(const CandidatePool& pool, const QaInstance& instance,
                                        std::string_view lfa) = 0;
};

std::unique_ptr<Matcher> make_lexical_matcher(const AnalyzedCorpus& corpus, Strategy strategy);
std::unique_ptr<Matcher> make_semantic_matcher(const Corpus& corpus, EmbeddingService& service,
                                               SemanticOptions options = {});
std::unique_ptr<Matcher> make_perplexity_matcher(const Corpus& corpus, LogProbService& service,
                                                 PerplexityOptions options, Diagnostics& diag);

}  // namespace lfqa
