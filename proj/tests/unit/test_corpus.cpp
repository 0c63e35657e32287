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
#include <random>

#include "lfqa/corpus.hpp"
#include "lfqa/error.hpp"
#include "support.hpp"

namespace lfqa {
namespace {

using testing::TempDir;
using testing::write_file;

std::string error_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(CorpusFile, LoadsDistinctRecords) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"id":"p1","page_id":"A","title":"T","text":"one"}
{"id":"p2","page_id":"A","title":"T","text":"two"}

{"id":"p3","page_id":"B","title":"","text":"three"}
)");
  Diagnostics diag(LogLevel::quiet);
  const auto corpus = load_corpus(dir / "c.jsonl", diag);
  EXPECT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus.at("p3").page_id, "B");
  EXPECT_EQ(diag.warning_count(), 0u);
}

TEST(CorpusFile, DuplicateIdNamesBothLines) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"id":"p0","page_id":"A","title":"T","text":"x"}
{"id":"p1","page_id":"A","title":"T","text":"x"}
{"id":"p2","page_id":"A","title":"T","text":"x"}
{"id":"p3","page_id":"A","title":"T","text":"x"}
{"id":"p1","page_id":"A","title":"T","text":"y"}
)");
  Diagnostics diag(LogLevel::quiet);
  const auto msg = error_message([&] { load_corpus(dir / "c.jsonl", diag); });
  EXPECT_NE(msg.find("p1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("5"), std::string::npos) << msg;
}

TEST(CorpusFile, EmptyFileWarns) {
  TempDir dir;
  write_file(dir / "c.jsonl", "");
  Diagnostics diag(LogLevel::quiet);
  EXPECT_TRUE(load_corpus(dir / "c.jsonl", diag).empty());
  EXPECT_EQ(diag.warning_count(), 1u);
}

TEST(CorpusFile, RejectsMissingFieldsAndMalformedJson) {
  TempDir dir;
  Diagnostics diag(LogLevel::quiet);
  write_file(dir / "a.jsonl", R"({"id":"p1","page_id":"","title":"T","text":"x"})" "\n");
  EXPECT_THROW(load_corpus(dir / "a.jsonl", diag), Error);
  write_file(dir / "b.jsonl", R"({"id":"p1","page_id":"A","title":"T"})" "\n");
  EXPECT_THROW(load_corpus(dir / "b.jsonl", diag), Error);
  write_file(dir / "c.jsonl", "{not json}\n");
  const auto msg = error_message([&] { load_corpus(dir / "c.jsonl", diag); });
  EXPECT_NE(msg.find(":1"), std::string::npos) << msg;
}

TEST(CorpusFile, RoundTripAndHashIgnoresOrder) {
  TempDir dir;
  auto corpus = testing::make_corpus({{"b", "P", "Title \"q\"", "Text with ünïcode"},
                                      {"a", "P", "", "second"}});
  write_corpus(dir / "c.jsonl", corpus);
  Diagnostics diag(LogLevel::quiet);
  const auto loaded = load_corpus(dir / "c.jsonl", diag);
  EXPECT_EQ(loaded, corpus);
  auto reordered = testing::make_corpus({{"a", "P", "", "second"},
                                         {"b", "P", "Title \"q\"", "Text with ünïcode"}});
  EXPECT_EQ(reordered.content_hash(), corpus.content_hash());
}

QaInstance instance(const std::string& id, std::vector<int> turns) {
  QaInstance q{id, "question " + id, {"lfa"}, {"da"}, {"A"}, {}};
  for (int t : turns) q.followups.push_back({t, "f", {"ans"}});
  return q;
}

TEST(Dataset, AcceptsIncreasingTurns) {
  Dataset d;
  EXPECT_NO_THROW(d.add(instance("q1", {2, 3, 4, 5})));
  EXPECT_EQ(d.size(), 1u);
}

TEST(Dataset, RejectsNonIncreasingTurns) {
  Dataset d;
  const auto msg = error_message([&] { d.add(instance("q1", {3, 2})); });
  EXPECT_NE(msg.find("non-increasing turn_index"), std::string::npos) << msg;
}

TEST(Dataset, RejectsEmptyQuestionAndDuplicates) {
  Dataset d;
  auto q = instance("q1", {});
  q.question.clear();
  EXPECT_THROW(d.add(q), Error);
  d.add(instance("q2", {}));
  EXPECT_THROW(d.add(instance("q2", {})), Error);
}

TEST(DatasetFile, RoundTripAndOrderIndependence) {
  TempDir dir;
  std::vector<QaInstance> items;
  for (int i = 0; i < 6; ++i) items.push_back(instance("q" + std::to_string(i), {2, 3}));
  items[2].long_form_answers.clear();  // allowed at load time
  const Dataset original(items);
  write_dataset(dir / "d.jsonl", original);
  Diagnostics diag(LogLevel::quiet);
  EXPECT_EQ(load_dataset(dir / "d.jsonl", diag).instances(), original.instances());

  std::mt19937 rng(3);
  std::shuffle(items.begin(), items.end(), rng);
  write_dataset(dir / "s.jsonl", Dataset(items));
  const auto shuffled = load_dataset(dir / "s.jsonl", diag);
  for (const auto& q : original) {
    ASSERT_NE(shuffled.find(q.id), nullptr);
    EXPECT_EQ(*shuffled.find(q.id), q);
  }
}

TEST(RunFile, RoundTrip) {
  TempDir dir;
  write_file(dir / "r.jsonl",
             R"({"question_id":"q1","passage_id":"p9","rank":2,"score":1.5}
{"question_id":"q1","passage_id":"p3","rank":1,"score":2.25}
{"question_id":"q1","passage_id":"p4","rank":3,"score":0.1}
)");
  const auto run = load_run(dir / "r.jsonl");
  ASSERT_EQ(run.size(), 1u);
  const auto& entries = run.questions()[0].entries;
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].passage_id, "p3");
  write_run(dir / "w.jsonl", run);
  EXPECT_EQ(load_run(dir / "w.jsonl"), run);
}

TEST(RunFile, RankGapIsAnError) {
  TempDir dir;
  write_file(dir / "r.jsonl",
             R"({"question_id":"q1","passage_id":"p1","rank":1,"score":2}
{"question_id":"q1","passage_id":"p2","rank":3,"score":1}
)");
  const auto msg = error_message([&] { load_run(dir / "r.jsonl"); });
  EXPECT_NE(msg.find("rank gap"), std::string::npos) << msg;
}

TEST(RunFile, DuplicatePassageIsAnError) {
  TempDir dir;
  write_file(dir / "r.jsonl",
             R"({"question_id":"q1","passage_id":"p1","rank":1,"score":2}
{"question_id":"q1","passage_id":"p1","rank":2,"score":1}
)");
  EXPECT_THROW(load_run(dir / "r.jsonl"), Error);
}

TEST(AnswersFile, RoundTripAndDegenerateFlag) {
  TempDir dir;
  std::vector<GeneratedAnswer> answers{{"q1", "Some text", std::string("model-x"), false},
                                       {"q2", "", std::nullopt, false}};
  write_answers(dir / "a.jsonl", answers);
  Diagnostics diag(LogLevel::quiet);
  const auto loaded = load_answers(dir / "a.jsonl", diag);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0], answers[0]);
  EXPECT_TRUE(loaded[1].degenerate);
  EXPECT_TRUE(diag.has_warning_containing("q2"));
}

TEST(ExtractionsFile, Loads) {
  TempDir dir;
  write_file(dir / "e.jsonl",
             R"({"question_id":"q1","interpretation_id":"i0","extracted_span":"x","gold_answers":["x","y"]})"
             "\n");
  const auto e = load_extractions(dir / "e.jsonl");
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].gold_answers.size(), 2u);
}

}  // namespace
}  // namespace lfqa
