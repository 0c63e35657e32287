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

#include "lfqa/matchers.hpp"

#include <cmath>

#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/parallel.hpp"
#include "lfqa/sampling.hpp"

namespace lfqa {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::lexical_recall:
      return "lexical_recall";
    case Strategy::jaccard:
      return "jaccard";
    case Strategy::rouge_l:
      return "rouge_l";
    case Strategy::semantic:
      return "semantic";
    case Strategy::perplexity:
      return "perplexity";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "lexical_recall" || name == "lexical") return Strategy::lexical_recall;
  if (name == "jaccard") return Strategy::jaccard;
  if (name == "rouge_l") return Strategy::rouge_l;
  if (name == "semantic") return Strategy::semantic;
  if (name == "perplexity") return Strategy::perplexity;
  throw_invalid("unknown matcher strategy '" + std::string(name) + "'");
}

std::vector<MatchScore> score_lexical(const CandidatePool& pool, const AnalyzedCorpus& corpus,
                                      std::string_view lfa, LexicalVariant variant) {
  const TokenSequence lfa_tokens = tokenize(lfa);
  const TokenSet lfa_set = TokenSet::from_tokens(lfa_tokens, corpus.stopwords());
  const bool degenerate = variant == LexicalVariant::rouge_l ? lfa_tokens.empty() : lfa_set.empty();
  if (degenerate) {
    throw_invalid("question '" + pool.question_id + "': long-form answer has no usable tokens");
  }
  const Strategy strategy = variant == LexicalVariant::recall    ? Strategy::lexical_recall
                            : variant == LexicalVariant::jaccard ? Strategy::jaccard
                                                                 : Strategy::rouge_l;
  std::vector<MatchScore> out;
  out.reserve(pool.size());
  for (const auto& entry : pool.entries) {
    const AnalyzedText& passage = corpus.get(entry.passage_id);
    double value = 0.0;
    switch (variant) {
      case LexicalVariant::recall:
        value = token_recall(passage.content, lfa_set);
        break;
      case LexicalVariant::jaccard:
        value = jaccard(passage.content, lfa_set);
        break;
      case LexicalVariant::rouge_l:
        value = rouge_l(passage.tokens, lfa_tokens).f1;
        break;
    }
    out.push_back(MatchScore{entry.passage_id, value, strategy, false});
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw_service("embedding dimension mismatch (" + std::to_string(a.size()) + " vs " +
                  std::to_string(b.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

std::vector<MatchScore> score_semantic(const CandidatePool& pool, const Corpus& corpus,
                                       std::string_view lfa, EmbeddingService& service,
                                       const SemanticOptions& options) {
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::string lfa_text(lfa);
  auto lfa_vectors = service.embed(std::span<const std::string>(&lfa_text, 1));
  if (lfa_vectors.size() != 1 || lfa_vectors.front().empty()) {
    throw_service("embedding service returned no vector for the long-form answer");
  }
  const EmbeddingVector lfa_vec = std::move(lfa_vectors.front());
  const double lfa_norm = std::sqrt(dot(lfa_vec, lfa_vec));

  std::vector<MatchScore> out;
  out.reserve(pool.size());
  for (std::size_t start = 0; start < pool.size(); start += batch) {
    const std::size_t end = std::min(pool.size(), start + batch);
    std::vector<std::string> texts;
    texts.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const Passage& p = corpus.at(pool.entries[i].passage_id);
      texts.push_back(p.title + ". " + p.text);
    }
    const auto vectors = service.embed(texts);
    if (vectors.size() != texts.size()) {
      throw_service("embedding service returned " + std::to_string(vectors.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (std::size_t i = start; i < end; ++i) {
      const auto& v = vectors[i - start];
      if (v.size() != lfa_vec.size()) {
        throw_service("embedding dimension mismatch for passage '" + pool.entries[i].passage_id +
                      "' (" + std::to_string(v.size()) + " vs " + std::to_string(lfa_vec.size()) +
                      ")");
      }
      double value = dot(v, lfa_vec);
      if (options.cosine) {
        const double denom = std::sqrt(dot(v, v)) * lfa_norm;
        value = denom > 0.0 ? value / denom : 0.0;
      }
      out.push_back(MatchScore{pool.entries[i].passage_id, value, Strategy::semantic, false});
    }
  }
  return out;
}

PerplexityContext draw_perplexity_context(const CandidatePool& pool,
                                          std::string_view candidate_id,
                                          const PerplexityOptions& options) {
  PerplexityContext ctx;
  ctx.prompt_template = options.prompt_template;
  ctx.seed = options.seed;
  const std::size_t want = options.k > 0 ? options.k - 1 : 0;
  std::vector<std::string> others;
  others.reserve(pool.size());
  for (const auto& e : pool.entries) {
    if (e.passage_id != candidate_id) others.push_back(e.passage_id);
  }
  if (options.resample_per_candidate) {
    ctx.context_sample = sample_without_replacement(others, want, options.seed, pool.question_id,
                                                    "context:" + std::string(candidate_id));
    return ctx;
  }
  // One ordering per question; the candidate itself is skipped.
  const auto ids = pool.passage_ids();
  const auto order = sample_without_replacement(ids, want + 1, options.seed, pool.question_id,
                                                "context");
  for (const auto& id : order) {
    if (ctx.context_sample.size() == want) break;
    if (id != candidate_id) ctx.context_sample.push_back(id);
  }
  return ctx;
}

namespace {

void replace_all(std::string& text, std::string_view placeholder, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

std::string render_passage(const Passage& p) {
  return "Title: " + p.title + "\n" + p.text + "\n\n";
}

}  // namespace

std::string render_prompt(std::string_view prompt_template, std::string_view question,
                          std::span<const Passage* const> context, const Passage& candidate) {
  if (prompt_template.find("{candidate}") == std::string_view::npos) {
    throw_invalid("perplexity prompt template lacks a {candidate} placeholder");
  }
  std::string context_text;
  for (const Passage* p : context) context_text += render_passage(*p);
  // Substitute passages last so braces inside passage text stay literal.
  std::string out(prompt_template);
  replace_all(out, "{question}", "\x01Q\x01");
  replace_all(out, "{context}", "\x01C\x01");
  replace_all(out, "{candidate}", "\x01P\x01");
  replace_all(out, "\x01Q\x01", question);
  replace_all(out, "\x01C\x01", context_text);
  replace_all(out, "\x01P\x01", render_passage(candidate));
  return out;
}

std::string template_version(std::string_view prompt_template) {
  return "tmpl-" + sha256_hex(prompt_template).substr(0, 12);
}

double answer_cost(std::span<const TokenLogProb> logprobs) {
  double total = 0.0;
  for (const auto& t : logprobs) total += t.logprob;
  return -total;
}

std::vector<MatchScore> score_perplexity(const CandidatePool& pool, const Corpus& corpus,
                                         std::string_view question, std::string_view lfa,
                                         const PerplexityOptions& options,
                                         LogProbService& service, Diagnostics& diag) {
  if (lfa.empty()) {
    throw_invalid("question '" + pool.question_id + "': long-form answer is empty");
  }
  if (options.k > 0 && pool.size() < options.k) {
    diag.warn("question '" + pool.question_id + "': pool of " + std::to_string(pool.size()) +
              " is smaller than k=" + std::to_string(options.k) + "; context has " +
              std::to_string(pool.size() > 0 ? pool.size() - 1 : 0) + " passage(s)");
  }
  const std::string continuation(lfa);
  std::vector<MatchScore> out(pool.size());
  parallel_for(pool.size(), options.jobs, [&](std::size_t i) {
    const auto& entry = pool.entries[i];
    const PerplexityContext ctx = draw_perplexity_context(pool, entry.passage_id, options);
    std::vector<const Passage*> context;
    context.reserve(ctx.context_sample.size());
    for (const auto& id : ctx.context_sample) context.push_back(&corpus.at(id));
    const std::string prompt =
        render_prompt(options.prompt_template, question, context, corpus.at(entry.passage_id));
    const auto logprobs = service.logprobs(prompt, continuation);

    std::string joined;
    bool valid = true;
    for (const auto& t : logprobs) {
      joined += t.token;
      if (!(t.logprob <= 0.0)) valid = false;
    }
    MatchScore& slot = out[i];
    slot.passage_id = entry.passage_id;
    slot.strategy = Strategy::perplexity;
    if (joined != continuation || !valid) {
      slot.failed = true;
      slot.score = -std::numeric_limits<double>::infinity();
      diag.warn("question '" + pool.question_id + "', passage '" + entry.passage_id +
                "': logprob response does not cover the continuation token-for-token (" +
                std::to_string(logprobs.size()) + " tokens returned)");
      return;
    }
    const double cost = answer_cost(logprobs);
    slot.score = -cost;
    diag.debug("question '" + pool.question_id + "', passage '" + entry.passage_id +
               "': answer cost " + std::to_string(cost));
  });
  return out;
}

std::vector<MatchScore> question_recall(const CandidatePool& pool, const AnalyzedCorpus& corpus,
                                        std::string_view question, Diagnostics& diag) {
  const TokenSet reference = TokenSet::from_text(question, corpus.stopwords());
  std::vector<MatchScore> out;
  out.reserve(pool.size());
  if (reference.empty()) {
    diag.warn("question '" + pool.question_id +
              "' has only stopwords; question recall is 0 for every passage");
  }
  for (const auto& entry : pool.entries) {
    const double value =
        reference.empty() ? 0.0 : token_recall(corpus.get(entry.passage_id).content, reference);
    out.push_back(MatchScore{entry.passage_id, value, Strategy::lexical_recall, false});
  }
  return out;
}

namespace {

class LexicalMatcher final : public Matcher {
 public:
  LexicalMatcher(const AnalyzedCorpus& corpus, Strategy strategy)
      : corpus_(corpus), strategy_(strategy) {
    switch (strategy) {
      case Strategy::lexical_recall:
        variant_ = LexicalVariant::recall;
        break;
      case Strategy::jaccard:
        variant_ = LexicalVariant::jaccard;
        break;
      case Strategy::rouge_l:
        variant_ = LexicalVariant::rouge_l;
        break;
      default:
        throw_invalid("strategy '" + std::string(to_string(strategy)) + "' is not lexical");
    }
  }
  Strategy strategy() const override { return strategy_; }
  std::vector<MatchScore> score(const CandidatePool& pool, const QaInstance&,
                                std::string_view lfa) override {
    return score_lexical(pool, corpus_, lfa, variant_);
  }

 private:
  const AnalyzedCorpus& corpus_;
  Strategy strategy_;
  LexicalVariant variant_ = LexicalVariant::recall;
};

class SemanticMatcher final : public Matcher {
 public:
  SemanticMatcher(const Corpus& corpus, EmbeddingService& service, SemanticOptions options)
      : corpus_(corpus), service_(service), options_(options) {}
  Strategy strategy() const override { return Strategy::semantic; }
  std::vector<MatchScore> score(const CandidatePool& pool, const QaInstance&,
                                std::string_view lfa) override {
    return score_semantic(pool, corpus_, lfa, service_, options_);
  }

 private:
  const Corpus& corpus_;
  EmbeddingService& service_;
  SemanticOptions options_;
};

class PerplexityMatcher final : public Matcher {
 public:
  PerplexityMatcher(const Corpus& corpus, LogProbService& service, PerplexityOptions options,
                    Diagnostics& diag)
      : corpus_(corpus), service_(service), options_(std::move(options)), diag_(diag) {}
  Strategy strategy() const override { return Strategy::perplexity; }
  std::vector<MatchScore> score(const CandidatePool& pool, const QaInstance& instance,
                                std::string_view lfa) override {
    return score_perplexity(pool, corpus_, instance.question, lfa, options_, service_, diag_);
  }

 private:
  const Corpus& corpus_;
  LogProbService& service_;
  PerplexityOptions options_;
  Diagnostics& diag_;
};

}  // namespace

std::unique_ptr<Matcher> make_lexical_matcher(const AnalyzedCorpus& corpus, Strategy strategy) {
  return std::make_unique<LexicalMatcher>(corpus, strategy);
}

std::unique_ptr<Matcher> make_semantic_matcher(const Corpus& corpus, EmbeddingService& service,
                                               SemanticOptions options) {
  return std::make_unique<SemanticMatcher>(corpus, service, options);
}

std::unique_ptr<Matcher> make_perplexity_matcher(const Corpus& corpus, LogProbService& service,
                                                 PerplexityOptions options, Diagnostics& diag) {
  return std::make_unique<PerplexityMatcher>(corpus, service, std::move(options), diag);
}

}  // namespace lfqa
