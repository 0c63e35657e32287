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

#include <map>

#include "lfqa/error.hpp"
#include "lfqa/retrieval.hpp"
#include "support.hpp"

namespace lfqa {
namespace {

using testing::make_corpus;

const StopwordList& sw() { return StopwordList::builtin(); }

Corpus five_passages() {
  return make_corpus({{"p1", "A", "", "Lionel Messi made his debut for Barcelona in 2004."},
                      {"p2", "A", "", "Messi scored twice, and Messi celebrated with the fans."},
                      {"p3", "B", "", "The debut season was long; the debut ended in May."},
                      {"p4", "C", "", "Football clubs in Spain play in La Liga."},
                      {"p5", "D", "", "Messi debut debut"}});
}

TEST(Bm25, MatchesHandEvaluatedScores) {
  const auto corpus = five_passages();
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  const std::map<std::string, double> expected = {{"p1", 1.04745976145534},
                                                  {"p2", 0.6930355839717529},
                                                  {"p3", 0.7096595718602011},
                                                  {"p5", 1.3313895995491918}};
  Diagnostics diag(LogLevel::quiet);
  const auto pool = index.retrieve("q", "Messi debut?", 10, sw(), diag);
  ASSERT_EQ(pool.size(), 4u);  // p4 shares no query term
  const std::vector<std::string> order{"p5", "p1", "p3", "p2"};
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(pool.entries[i].passage_id, order[i]);
    EXPECT_NEAR(pool.entries[i].score, expected.at(order[i]), 1e-12);
  }
  EXPECT_EQ(pool.source, PoolSource::builtin_bm25);
}

TEST(Bm25, StatisticsAreConsistent) {
  const auto corpus = five_passages();
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  EXPECT_EQ(index.num_passages(), 5u);
  EXPECT_DOUBLE_EQ(index.average_length(), 26.0 / 5.0);
  EXPECT_EQ(index.passage_length("p5"), 3u);
  EXPECT_EQ(index.document_frequency("messi"), 3u);
  EXPECT_EQ(index.postings("messi").size(), 3u);
  EXPECT_EQ(index.document_frequency("the"), 0u);  // stopword
  EXPECT_EQ(index.document_frequency("absent"), 0u);
}

TEST(Bm25, UniqueTermHasSinglePosting) {
  const auto corpus = make_corpus({{"a", "P", "", "common words here"},
                                   {"b", "P", "", "common zyzzyva here"},
                                   {"c", "P", "", "common words there"}});
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  EXPECT_EQ(index.postings("zyzzyva").size(), 1u);
}

TEST(Bm25, DuplicateTextsGetIdenticalLengths) {
  const auto corpus = make_corpus({{"a", "P", "", "same text body"},
                                   {"b", "Q", "", "same text body"}});
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  EXPECT_EQ(index.passage_length("a"), index.passage_length("b"));
}

TEST(Bm25, PassageWithAllTermsRanksFirst) {
  const auto corpus = make_corpus({{"p1", "P", "", "alpha beta gamma"},
                                   {"p2", "P", "", "alpha delta epsilon"}});
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  Diagnostics diag(LogLevel::quiet);
  EXPECT_EQ(index.retrieve("q", "alpha beta", 2, sw(), diag).entries.front().passage_id, "p1");
}

TEST(Bm25, HigherTermFrequencyScoresHigher) {
  const auto corpus = make_corpus({{"lo", "P", "", "alpha x y z"},
                                   {"hi", "P", "", "alpha alpha y z"},
                                   {"other", "P", "", "q r s t"}});
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  const std::vector<std::string> terms{"alpha"};
  EXPECT_GT(index.score(terms, "hi"), index.score(terms, "lo"));
}

TEST(Bm25, TiesOrderedByPassageId) {
  const auto corpus = make_corpus({{"z", "P", "", "alpha beta"},
                                   {"m", "P", "", "alpha beta"},
                                   {"a", "P", "", "alpha beta"}});
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  Diagnostics diag(LogLevel::quiet);
  const auto ids = index.retrieve("q", "alpha", 3, sw(), diag).passage_ids();
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "m", "z"}));
}

TEST(Bm25, PoolSizeIsRespected) {
  Corpus corpus;
  for (int i = 0; i < 30; ++i) {
    corpus.add({"p" + std::to_string(i), "P", "", "alpha filler" + std::to_string(i)});
  }
  const auto index = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  Diagnostics diag(LogLevel::quiet);
  EXPECT_EQ(index.retrieve("q", "alpha", 7, sw(), diag).size(), 7u);
}

TEST(Bm25, StopwordOnlyQueryYieldsEmptyPoolWithWarning) {
  const auto index = InvertedIndex::build(five_passages(), sw(), 0.9, 0.4);
  Diagnostics diag(LogLevel::quiet);
  EXPECT_TRUE(index.retrieve("q7", "who is the who", 5, sw(), diag).empty());
  EXPECT_TRUE(diag.has_warning_containing("q7"));
}

TEST(Bm25, EmptyCorpusIsAnError) {
  EXPECT_THROW(InvertedIndex::build(Corpus{}, sw(), 0.9, 0.4), Error);
}

TEST(Bm25, SerializationRoundTripsAndIsDeterministic) {
  const auto corpus = five_passages();
  const auto a = InvertedIndex::build(corpus, sw(), 0.9, 0.4);
  const auto b = InvertedIndex::build(corpus, sw(), 0.9, 0.4, 3);
  EXPECT_EQ(a.serialize(), b.serialize());
  const auto restored = InvertedIndex::deserialize(a.serialize());
  EXPECT_EQ(restored, a);
  EXPECT_EQ(restored.corpus_hash(), corpus.content_hash());
  EXPECT_EQ(restored.stopword_hash(), sw().hash());
  EXPECT_EQ(restored.tokenizer_version(), static_cast<std::uint32_t>(kTokenizerVersion));

  testing::TempDir dir;
  a.save(dir / "i.bin");
  EXPECT_EQ(InvertedIndex::load(dir / "i.bin"), a);
}

TEST(Bm25, CorruptIndexIsRejected) {
  const auto bytes = InvertedIndex::build(five_passages(), sw(), 0.9, 0.4).serialize();
  EXPECT_THROW(InvertedIndex::deserialize(bytes.substr(0, bytes.size() / 2)), Error);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(InvertedIndex::deserialize(bad_magic), Error);
}

TEST(RetrievalConfig, Validation) {
  RetrievalConfig c;
  EXPECT_NO_THROW(c.validate());
  c.pool_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.b = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

RunFile run_with(int questions, int depth) {
  RunFile run;
  for (int q = 0; q < questions; ++q) {
    QuestionRun qr{"q" + std::to_string(q), {}};
    for (int i = 0; i < depth; ++i) {
      qr.entries.push_back({"p" + std::to_string(i), 1000.0 - i, i + 1});
    }
    run.add(qr);
  }
  return run;
}

TEST(IngestRun, TruncatesToPoolSize) {
  Diagnostics diag(LogLevel::quiet);
  const auto pools = ingest_run(run_with(2, 150), 100, nullptr, diag);
  ASSERT_EQ(pools.size(), 2u);
  EXPECT_EQ(pools[0].size(), 100u);
  EXPECT_EQ(pools[0].source, PoolSource::ingested_run);
  EXPECT_EQ(diag.warning_count(), 0u);
}

TEST(IngestRun, ShortPoolWarns) {
  Diagnostics diag(LogLevel::quiet);
  const auto pools = ingest_run(run_with(1, 40), 100, nullptr, diag);
  EXPECT_EQ(pools[0].size(), 40u);
  EXPECT_GE(diag.warning_count(), 1u);
}

TEST(IngestRun, RankScoreInconsistencyIsAnError) {
  RunFile run;
  run.add({"q", {{"p1", 1.0, 1}, {"p2", 2.0, 2}}});
  Diagnostics diag(LogLevel::quiet);
  try {
    ingest_run(run, 10, nullptr, diag);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("rank/score inconsistency"), std::string::npos);
  }
}

TEST(IngestRun, EqualScoresReorderedById) {
  RunFile run;
  run.add({"q", {{"p9", 1.0, 1}, {"p2", 1.0, 2}, {"p5", 0.5, 3}}});
  Diagnostics diag(LogLevel::quiet);
  const auto pools = ingest_run(run, 10, nullptr, diag);
  EXPECT_EQ(pools[0].passage_ids(), (std::vector<std::string>{"p2", "p9", "p5"}));
}

TEST(IngestRun, UnknownQuestionWarns) {
  Dataset dataset;
  dataset.add({"q0", "question", {"lfa"}, {}, {}, {}});
  Diagnostics diag(LogLevel::quiet);
  ingest_run(run_with(2, 3), 3, &dataset, diag);
  EXPECT_TRUE(diag.has_warning_containing("q1"));
}

TEST(PoolsToRun, AssignsRanksInOrder) {
  const std::vector<CandidatePool> pools{testing::make_pool("q", {"a", "b", "c"})};
  const auto run = pools_to_run(pools);
  ASSERT_EQ(run.size(), 1u);
  EXPECT_EQ(run.questions()[0].entries[2].rank, 3);
  EXPECT_EQ(run.questions()[0].entries[2].passage_id, "c");
}

}  // namespace
}  // namespace lfqa
