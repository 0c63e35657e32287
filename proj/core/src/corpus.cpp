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

#include "lfqa/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "jsonl.hpp"
#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/hashing.hpp"

namespace lfqa {

using jsonl::Json;
using jsonl::RecordReader;

void Corpus::add(Passage passage) {
  if (passage.id.empty()) throw_invalid("passage id must be non-empty");
  if (passage.page_id.empty()) throw_invalid("passage '" + passage.id + "' has an empty page_id");
  if (passage.text.empty()) throw_invalid("passage '" + passage.id + "' has empty text");
  if (by_id_.contains(passage.id)) throw_invalid("duplicate passage id '" + passage.id + "'");
  by_id_.emplace(passage.id, passages_.size());
  passages_.push_back(std::move(passage));
}

const Passage* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &passages_[it->second];
}

const Passage& Corpus::at(std::string_view id) const {
  const Passage* p = find(id);
  if (p == nullptr) throw_invalid("unknown passage id '" + std::string(id) + "'");
  return *p;
}

std::string Corpus::content_hash() const {
  std::vector<const Passage*> ordered;
  ordered.reserve(passages_.size());
  for (const auto& p : passages_) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Passage* a, const Passage* b) { return a->id < b->id; });
  std::string blob;
  for (const Passage* p : ordered) {
    blob += jsonl::canonical_dump(
        Json{{"id", p->id}, {"page_id", p->page_id}, {"title", p->title}, {"text", p->text}});
    blob.push_back('\n');
  }
  return sha256_hex(blob);
}

Dataset::Dataset(std::vector<QaInstance> instances) {
  for (auto& instance : instances) add(std::move(instance));
}

void Dataset::add(QaInstance instance) {
  if (instance.id.empty()) throw_invalid("question id must be non-empty");
  if (instance.question.empty()) throw_invalid("question '" + instance.id + "' has an empty question");
  int previous = 1;
  for (const auto& f : instance.followups) {
    if (f.turn_index < 2) {
      throw_invalid("question '" + instance.id + "': follow-up turn_index must be >= 2");
    }
    if (f.turn_index <= previous) {
      throw_invalid("question '" + instance.id + "': non-increasing turn_index");
    }
    previous = f.turn_index;
  }
  if (by_id_.contains(instance.id)) throw_invalid("duplicate question id '" + instance.id + "'");
  by_id_.emplace(instance.id, instances_.size());
  instances_.push_back(std::move(instance));
}

const QaInstance* Dataset::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &instances_[it->second];
}

void RunFile::add(QuestionRun run) {
  if (by_id_.contains(run.question_id)) {
    throw_invalid("run already contains question '" + run.question_id + "'");
  }
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < run.entries.size(); ++i) {
    if (run.entries[i].rank != static_cast<int>(i) + 1) {
      throw_invalid("question '" + run.question_id + "': rank gap at rank " +
                    std::to_string(i + 1));
    }
    if (!seen.insert(run.entries[i].passage_id).second) {
      throw_invalid("question '" + run.question_id + "': duplicate passage '" +
                    run.entries[i].passage_id + "'");
    }
  }
  by_id_.emplace(run.question_id, questions_.size());
  questions_.push_back(std::move(run));
}

const QuestionRun* RunFile::find(std::string_view question_id) const {
  auto it = by_id_.find(std::string(question_id));
  return it == by_id_.end() ? nullptr : &questions_[it->second];
}

Corpus load_corpus(const std::filesystem::path& path, Diagnostics& diag) {
  Corpus corpus;
  std::map<std::string, std::size_t, std::less<>> first_line;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    RecordReader r(record, file, line);
    Passage p{r.required_string("id"), r.required_string("page_id"),
              r.required_string("title", true), r.required_string("text")};
    if (auto it = first_line.find(p.id); it != first_line.end()) {
      r.fail("duplicate passage id '" + p.id + "' (lines " + std::to_string(it->second) +
             " and " + std::to_string(line) + ")");
    }
    first_line.emplace(p.id, line);
    corpus.add(std::move(p));
  });
  if (corpus.empty()) diag.warn("corpus '" + file + "' is empty");
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.passages()) {
    out += jsonl::canonical_dump(
        Json{{"id", p.id}, {"page_id", p.page_id}, {"title", p.title}, {"text", p.text}});
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Dataset load_dataset(const std::filesystem::path& path, Diagnostics& diag) {
  Dataset dataset;
  std::map<std::string, std::size_t, std::less<>> first_line;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    RecordReader r(record, file, line);
    QaInstance q;
    q.id = r.required_string("id");
    q.question = r.required_string("question");
    q.long_form_answers = r.string_list("long_form_answers");
    q.direct_answers = r.string_list("direct_answers");
    q.gold_page_ids = r.string_list("gold_page_ids");
    if (r.has("followups")) {
      const Json& fs = r.required("followups");
      if (!fs.is_array()) r.fail("field 'followups' must be a list");
      int previous = 1;
      for (const auto& f : fs) {
        if (!f.is_object()) r.fail("follow-up entries must be objects");
        RecordReader fr(f, file, line);
        Followup fu;
        fu.turn_index = static_cast<int>(fr.required_int("turn_index"));
        fu.question = fr.required_string("question", true);
        fu.answers = fr.string_list("answers");
        if (fu.turn_index < 2) r.fail("follow-up turn_index must be >= 2");
        if (fu.turn_index <= previous) r.fail("non-increasing turn_index");
        previous = fu.turn_index;
        q.followups.push_back(std::move(fu));
      }
    }
    if (auto it = first_line.find(q.id); it != first_line.end()) {
      r.fail("duplicate question id '" + q.id + "' (lines " + std::to_string(it->second) +
             " and " + std::to_string(line) + ")");
    }
    first_line.emplace(q.id, line);
    dataset.add(std::move(q));
  });
  if (dataset.empty()) diag.warn("dataset '" + file + "' is empty");
  return dataset;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::string out;
  for (const auto& q : dataset) {
    Json followups = Json::array();
    for (const auto& f : q.followups) {
      followups.push_back(
          Json{{"turn_index", f.turn_index}, {"question", f.question}, {"answers", f.answers}});
    }
    out += jsonl::canonical_dump(Json{{"id", q.id},
                                      {"question", q.question},
                                      {"long_form_answers", q.long_form_answers},
                                      {"direct_answers", q.direct_answers},
                                      {"gold_page_ids", q.gold_page_ids},
                                      {"followups", followups}});
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

RunFile load_run(const std::filesystem::path& path) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunEntry>, std::less<>> grouped;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    RecordReader r(record, file, line);
    std::string qid = r.required_string("question_id");
    RunEntry e{r.required_string("passage_id"), r.required_number("score"),
               static_cast<int>(r.required_int("rank"))};
    if (e.rank < 1) r.fail("rank must start at 1");
    auto [it, inserted] = grouped.try_emplace(qid);
    if (inserted) order.push_back(qid);
    it->second.push_back(std::move(e));
  });
  RunFile run;
  for (const auto& qid : order) {
    auto& entries = grouped[qid];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != static_cast<int>(i) + 1) {
        throw_invalid(file + ": question '" + qid + "': rank gap (expected rank " +
                      std::to_string(i + 1) + ", found " + std::to_string(entries[i].rank) +
                      ")");
      }
    }
    run.add(QuestionRun{qid, std::move(entries)});
  }
  return run;
}

std::string serialize_run(const RunFile& run) {
  std::string out;
  for (const auto& q : run.questions()) {
    for (const auto& e : q.entries) {
      out += jsonl::canonical_dump(Json{{"question_id", q.question_id},
                                        {"passage_id", e.passage_id},
                                        {"rank", e.rank},
                                        {"score", e.score}});
      out.push_back('\n');
    }
  }
  return out;
}

void write_run(const std::filesystem::path& path, const RunFile& run) {
  write_file_atomic(path, serialize_run(run));
}

std::vector<GeneratedAnswer> load_answers(const std::filesystem::path& path, Diagnostics& diag) {
  std::vector<GeneratedAnswer> answers;
  std::set<std::string, std::less<>> seen;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    RecordReader r(record, file, line);
    GeneratedAnswer a;
    a.question_id = r.required_string("question_id");
    a.text = r.required_string("text", true);
    a.provenance = r.optional_string("provenance");
    if (a.text.empty()) {
      a.degenerate = true;
      diag.warn(r.where() + ": empty generated answer for '" + a.question_id +
                "' flagged degenerate");
    }
    if (!seen.insert(a.question_id).second) {
      r.fail("duplicate generated answer for question '" + a.question_id + "'");
    }
    answers.push_back(std::move(a));
  });
  return answers;
}

void write_answers(const std::filesystem::path& path, const std::vector<GeneratedAnswer>& answers) {
  std::string out;
  for (const auto& a : answers) {
    Json record{{"question_id", a.question_id}, {"text", a.text}};
    if (a.provenance) record["provenance"] = *a.provenance;
    out += jsonl::canonical_dump(record);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

std::vector<Extraction> load_extractions(const std::filesystem::path& path) {
  std::vector<Extraction> out;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    RecordReader r(record, file, line);
    out.push_back(Extraction{r.required_string("question_id"),
                             r.required_string("interpretation_id"),
                             r.required_string("extracted_span", true),
                             r.string_list("gold_answers")});
  });
  return out;
}

}  // namespace lfqa
