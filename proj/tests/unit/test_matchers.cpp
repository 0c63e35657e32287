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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lfqa/analysis.hpp"
#include "lfqa/error.hpp"
#include "lfqa/matchers.hpp"
#include "mock_services.hpp"
#include "support.hpp"

namespace lfqa {
namespace {

using testing::make_corpus;
using testing::make_pool;

const StopwordList& sw() { return StopwordList::builtin(); }

RetryPolicy fast_retry() {
  RetryPolicy p;
  p.max_attempts = 2;
  p.initial_backoff = std::chrono::milliseconds(1);
  p.timeout = std::chrono::milliseconds(5000);
  return p;
}

TEST(LexicalMatch, RecallHandCounts) {
  const auto corpus = make_corpus({{"all", "P", "", "lionel messi career barcelona debut today"},
                                   {"three", "P", "", "messi career barcelona goals"},
                                   {"none", "P", "", "tennis court"}});
  AnalyzedCorpus analyzed(corpus, sw());
  const auto pool = make_pool("q", {"all", "three", "none"});
  const auto scores =
      score_lexical(pool, analyzed, "Lionel Messi: career at Barcelona, debut.", LexicalVariant::recall);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].passage_id, "all");
  EXPECT_DOUBLE_EQ(scores[0].score, 1.0);
  EXPECT_DOUBLE_EQ(scores[1].score, 0.6);
  EXPECT_DOUBLE_EQ(scores[2].score, 0.0);
  EXPECT_EQ(scores[0].strategy, Strategy::lexical_recall);
}

TEST(LexicalMatch, JaccardAndRougeVariants) {
  const auto corpus = make_corpus({{"p", "P", "", "the cat sat"}});
  AnalyzedCorpus analyzed(corpus, sw());
  const auto pool = make_pool("q", {"p"});
  EXPECT_DOUBLE_EQ(score_lexical(pool, analyzed, "the cat ran", LexicalVariant::rouge_l)[0].score,
                   2.0 / 3.0);
  EXPECT_DOUBLE_EQ(score_lexical(pool, analyzed, "cat ran", LexicalVariant::jaccard)[0].score,
                   1.0 / 3.0);
}

TEST(LexicalMatch, DegenerateLfaNamesQuestion) {
  const auto corpus = make_corpus({{"p", "P", "", "text"}});
  AnalyzedCorpus analyzed(corpus, sw());
  try {
    score_lexical(make_pool("q42", {"p"}), analyzed, "the of and", LexicalVariant::recall);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("q42"), std::string::npos);
  }
}

TEST(LexicalMatch, MatcherDispatchesStrategies) {
  const auto corpus = make_corpus({{"p", "P", "", "alpha beta"}});
  AnalyzedCorpus analyzed(corpus, sw());
  const QaInstance qa{"q", "question", {"alpha"}, {}, {}, {}};
  auto m = make_lexical_matcher(analyzed, Strategy::jaccard);
  EXPECT_EQ(m->strategy(), Strategy::jaccard);
  EXPECT_DOUBLE_EQ(m->score(make_pool("q", {"p"}), qa, "alpha")[0].score, 0.5);
  EXPECT_THROW(make_lexical_matcher(analyzed, Strategy::semantic), Error);
}

TEST(QuestionRecall, HandCounts) {
  const auto corpus = make_corpus({{"full", "P", "", "messi debut barcelona season"},
                                   {"half", "P", "", "messi goal"},
                                   {"none", "P", "", "tennis"}});
  AnalyzedCorpus analyzed(corpus, sw());
  Diagnostics diag(LogLevel::quiet);
  const auto s = question_recall(make_pool("q", {"full", "half", "none"}), analyzed,
                                 "When was Messi's debut?", diag);
  EXPECT_DOUBLE_EQ(s[0].score, 1.0);
  EXPECT_DOUBLE_EQ(s[1].score, 0.5);
  EXPECT_DOUBLE_EQ(s[2].score, 0.0);
}

TEST(QuestionRecall, StopwordOnlyQuestionWarnsAndScoresZero) {
  const auto corpus = make_corpus({{"p", "P", "", "who is it"}});
  AnalyzedCorpus analyzed(corpus, sw());
  Diagnostics diag(LogLevel::quiet);
  const auto s = question_recall(make_pool("q", {"p"}), analyzed, "who is the who", diag);
  EXPECT_EQ(s[0].score, 0.0);
  EXPECT_EQ(diag.warning_count(), 1u);
}

TEST(Dot, HandValues) {
  const std::vector<double> a{1, 2}, b{3, 4};
  EXPECT_DOUBLE_EQ(dot(a, b), 11.0);
  EXPECT_THROW(dot(a, std::vector<double>{1}), Error);
}

TEST(SemanticMatch, DotProductsAgainstMockService) {
  const auto corpus = make_corpus({{"p1", "P", "T1", "first"},
                                   {"p2", "P", "T2", "second"},
                                   {"p3", "P", "T3", "third"}});
  mock::MockOptions opts;
  opts.embeddings = {{"the answer", {3, 4}},
                     {"T1. first", {1, 2}},
                     {"T2. second", {-4, 3}},
                     {"T3. third", {3, 4}}};
  mock::MockServer server(opts);
  auto service = make_http_embedding_service(Endpoint::parse(server.url("/embed")), fast_retry());
  const auto s = score_semantic(make_pool("q", {"p1", "p2", "p3"}), corpus, "the answer",
                                *service, {2, false});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0].score, 11.0);
  EXPECT_DOUBLE_EQ(s[1].score, 0.0);   // orthogonal
  EXPECT_DOUBLE_EQ(s[2].score, 25.0);  // v . v
  EXPECT_EQ(s[0].strategy, Strategy::semantic);

  const auto c = score_semantic(make_pool("q", {"p1", "p3"}), corpus, "the answer", *service,
                                {16, true});
  EXPECT_NEAR(c[0].score, 11.0 / (5.0 * std::sqrt(5.0)), 1e-15);
  EXPECT_NEAR(c[1].score, 1.0, 1e-15);
}

TEST(SemanticMatch, DimensionMismatchIsServiceFailure) {
  const auto corpus = make_corpus({{"p1", "P", "T", "a"}, {"p2", "P", "T", "b"}});
  mock::MockOptions opts;
  opts.wrong_dimension_every = 3;  // the third vector (second passage) is too long
  mock::MockServer server(opts);
  auto service = make_http_embedding_service(Endpoint::parse(server.url("/embed")), fast_retry());
  try {
    score_semantic(make_pool("q", {"p1", "p2"}), corpus, "lfa", *service);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::service);
  }
}

std::vector<TokenLogProb> tokens(std::vector<std::pair<std::string, double>> pieces) {
  std::vector<TokenLogProb> out;
  for (auto& [t, lp] : pieces) out.push_back({t, lp});
  return out;
}

TEST(AnswerCost, SumsNegatedLogProbs) {
  EXPECT_DOUBLE_EQ(answer_cost(tokens({{"a", -1.0}, {"b", -2.0}, {"c", -0.5}})), 3.5);
  EXPECT_DOUBLE_EQ(answer_cost({}), 0.0);
}

Corpus perplexity_corpus() {
  return make_corpus({{"good", "P", "Good", "relevant passage"},
                      {"bad", "P", "Bad", "unrelated passage"},
                      {"c1", "P", "C1", "context one"},
                      {"c2", "P", "C2", "context two"},
                      {"c3", "P", "C3", "context three"}});
}

TEST(PerplexityMatch, CostsAndRankingAgainstMockService) {
  const auto corpus = perplexity_corpus();
  mock::MockOptions opts;
  opts.logprobs_by_marker = {
      {"Title: Good\n", tokens({{"Messi ", -1.0}, {"debuted ", -2.0}, {"young.", -0.5}})},
      {"Title: Bad\n", tokens({{"Messi ", -2.0}, {"debuted ", -1.0}, {"young.", -1.0}})}};
  mock::MockServer server(opts);
  auto service = make_http_logprob_service(Endpoint::parse(server.url("/logprobs")), fast_retry());
  PerplexityOptions po;
  po.k = 3;
  po.seed = 5;
  Diagnostics diag(LogLevel::quiet);
  const auto pool = make_pool("q", {"bad", "good", "c1", "c2", "c3"});
  const auto s =
      score_perplexity(pool, corpus, "Who debuted?", "Messi debuted young.", po, *service, diag);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[1].passage_id, "good");
  EXPECT_DOUBLE_EQ(s[1].score, -3.5);
  EXPECT_DOUBLE_EQ(s[0].score, -4.0);
  EXPECT_GT(s[1].score, s[0].score);
  EXPECT_FALSE(s[1].failed);
  EXPECT_EQ(diag.warning_count(), 0u);
}

TEST(PerplexityMatch, MismatchedTokensFailTheCandidate) {
  const auto corpus = perplexity_corpus();
  mock::MockOptions opts;
  opts.mismatched_tokens = true;
  mock::MockServer server(opts);
  auto service = make_http_logprob_service(Endpoint::parse(server.url("/logprobs")), fast_retry());
  PerplexityOptions po;
  po.k = 2;
  Diagnostics diag(LogLevel::quiet);
  const auto s = score_perplexity(make_pool("q", {"good", "bad"}), corpus, "Q?", "an answer", po,
                                  *service, diag);
  EXPECT_TRUE(s[0].failed);
  EXPECT_TRUE(std::isinf(s[0].score));
  EXPECT_EQ(diag.warning_count(), 2u);
}

TEST(PerplexityMatch, DeterministicAcrossThreadCounts) {
  const auto corpus = perplexity_corpus();
  mock::MockServer server;
  auto service = make_http_logprob_service(Endpoint::parse(server.url("/logprobs")), fast_retry());
  const auto pool = make_pool("q", {"good", "bad", "c1", "c2", "c3"});
  PerplexityOptions po;
  po.k = 3;
  po.seed = 11;
  Diagnostics diag(LogLevel::quiet);
  po.jobs = 1;
  const auto serial = score_perplexity(pool, corpus, "Q?", "Some long answer text.", po, *service, diag);
  po.jobs = 4;
  const auto parallel = score_perplexity(pool, corpus, "Q?", "Some long answer text.", po, *service, diag);
  EXPECT_EQ(serial, parallel);
}

TEST(PerplexityContext, OneOrderingPerQuestionExcludingCandidate) {
  const auto pool = make_pool("q", {"a", "b", "c", "d", "e", "f"});
  PerplexityOptions po;
  po.k = 3;
  po.seed = 9;
  for (const auto& e : pool.entries) {
    const auto ctx = draw_perplexity_context(pool, e.passage_id, po);
    EXPECT_EQ(ctx.context_sample.size(), 2u);
    for (const auto& id : ctx.context_sample) EXPECT_NE(id, e.passage_id);
  }
  // Candidates outside the shared ordering all see the same context.
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& e : pool.entries) ++counts[draw_perplexity_context(pool, e.passage_id, po).context_sample];
  std::size_t most = 0;
  for (const auto& [ctx, n] : counts) most = std::max(most, n);
  EXPECT_GE(most, 3u);
}

TEST(PerplexityContext, SmallPoolShrinksContextAndWarns) {
  const auto corpus = perplexity_corpus();
  PerplexityOptions po;
  po.k = 5;
  const auto pool = make_pool("q", {"good", "bad", "c1"});
  EXPECT_EQ(draw_perplexity_context(pool, "good", po).context_sample.size(), 2u);
  mock::MockServer server;
  auto service = make_http_logprob_service(Endpoint::parse(server.url("/logprobs")), fast_retry());
  Diagnostics diag(LogLevel::quiet);
  score_perplexity(pool, corpus, "Q?", "answer", po, *service, diag);
  EXPECT_TRUE(diag.has_warning_containing("smaller than k"));
}

TEST(PerplexityContext, ResamplingVariesPerCandidate) {
  const auto pool = make_pool("q", {"a", "b", "c", "d", "e", "f", "g", "h"});
  PerplexityOptions po;
  po.k = 3;
  po.resample_per_candidate = true;
  std::set<std::vector<std::string>> distinct;
  for (const auto& e : pool.entries) distinct.insert(draw_perplexity_context(pool, e.passage_id, po).context_sample);
  EXPECT_GT(distinct.size(), 2u);
}

TEST(Prompt, RendersTemplateAndVersion) {
  const Passage c1{"c1", "P", "Ctx", "context {question} braces"};
  const Passage cand{"x", "P", "Cand", "candidate text"};
  const std::vector<const Passage*> ctx{&c1};
  const auto prompt = render_prompt(kDefaultPerplexityTemplate, "Why?", ctx, cand);
  EXPECT_EQ(prompt,
            "Question: Why?\n\nTitle: Ctx\ncontext {question} braces\n\nTitle: Cand\ncandidate "
            "text\n\n\nAnswer: ");
  EXPECT_THROW(render_prompt("no placeholder", "q", ctx, cand), Error);
  EXPECT_EQ(template_version(kDefaultPerplexityTemplate).rfind("tmpl-", 0), 0u);
  EXPECT_EQ(template_version("a").size(), 17u);
  EXPECT_NE(template_version("a"), template_version("b"));
}

TEST(StrategyNames, RoundTrip) {
  for (auto s : {Strategy::lexical_recall, Strategy::jaccard, Strategy::rouge_l, Strategy::semantic,
                 Strategy::perplexity}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("bm25"), Error);
}

}  // namespace
}  // namespace lfqa
