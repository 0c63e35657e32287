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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lfqa/diagnostics.hpp"

namespace lfqa {

/// Corpus unit. `page_id` names the source page and is the key for
/// page-level recall.
struct Passage {
  std::string id;
  std::string page_id;
  std::string title;
  std::string text;

  bool operator==(const Passage&) const = default;
};

/// Immutable after loading; safe for concurrent reads.
class Corpus {
 public:
  Corpus() = default;

  /// Throws invalid_input on a duplicate id or an empty page_id/text.
  void add(Passage passage);

  const Passage* find(std::string_view id) const;
  const Passage& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::size_t size() const { return passages_.size(); }
  bool empty() const { return passages_.empty(); }

  /// Insertion order.
  const std::vector<Passage>& passages() const { return passages_; }

  /// SHA-256 over the records in id order; independent of file line order.
  std::string content_hash() const;

  bool operator==(const Corpus& other) const { return passages_ == other.passages_; }

 private:
  std::vector<Passage> passages_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct Followup {
  int turn_index = 2;
  std::string question;
  std::vector<std::string> answers;

  bool operator==(const Followup&) const = default;
};

/// A first-turn question with its references. Follow-up turns of a
/// conversation hang off the first question.
struct QaInstance {
  std::string id;
  std::string question;
  std::vector<std::string> long_form_answers;
  std::vector<std::string> direct_answers;
  std::vector<std::string> gold_page_ids;
  std::vector<Followup> followups;

  bool operator==(const QaInstance&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<QaInstance> instances);

  void add(QaInstance instance);
  const QaInstance* find(std::string_view id) const;

  const std::vector<QaInstance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  auto begin() const { return instances_.begin(); }
  auto end() const { return instances_.end(); }

 private:
  std::vector<QaInstance> instances_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct RunEntry {
  std::string passage_id;
  double score = 0.0;
  int rank = 1;

  bool operator==(const RunEntry&) const = default;
};

struct QuestionRun {
  std::string question_id;
  std::vector<RunEntry> entries;  // rank order, ranks 1..n

  bool operator==(const QuestionRun&) const = default;
};

/// Ranked lists per question, questions in first-appearance order.
class RunFile {
 public:
  /// Appends a question; throws if the id is already present or ranks are
  /// not exactly 1..n in order.
  void add(QuestionRun run);

  const QuestionRun* find(std::string_view question_id) const;
  const std::vector<QuestionRun>& questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }

  bool operator==(const RunFile& other) const { return questions_ == other.questions_; }

 private:
  std::vector<QuestionRun> questions_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct GeneratedAnswer {
  std::string question_id;
  std::string text;
  std::optional<std::string> provenance;
  bool degenerate = false;  // set when text is empty

  bool operator==(const GeneratedAnswer&) const = default;
};

/// One extracted answer span per question interpretation, produced by an
/// external reading-comprehension model.
struct Extraction {
  std::string question_id;
  std::string interpretation_id;
  std::string extracted_span;
  std::vector<std::string> gold_answers;

  bool operator==(const Extraction&) const = default;
};

Corpus load_corpus(const std::filesystem::path& path, Diagnostics& diag);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Structural validation only; mining-specific requirements (an LFA must be
/// present) are checked by the miner.
Dataset load_dataset(const std::filesystem::path& path, Diagnostics& diag);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Lines may appear in any order; each question's ranks must be 1..n.
RunFile load_run(const std::filesystem::path& path);
void write_run(const std::filesystem::path& path, const RunFile& run);
std::string serialize_run(const RunFile& run);

std::vector<GeneratedAnswer> load_answers(const std::filesystem::path& path, Diagnostics& diag);
void write_answers(const std::filesystem::path& path, const std::vector<GeneratedAnswer>& answers);

std::vector<Extraction> load_extractions(const std::filesystem::path& path);

}  // namespace lfqa
