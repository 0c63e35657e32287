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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lfqa/analysis.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/textproc.hpp"

namespace lfqa {

/// Hits over a denominator, kept so that micro averages can be formed.
struct Fraction {
  std::size_t hits = 0;
  std::size_t total = 0;

  double value() const { return static_cast<double>(hits) / static_cast<double>(total); }
  bool operator==(const Fraction&) const = default;
};

struct TurnRecall {
  int turn_index = 2;
  Fraction fraction;

  bool operator==(const TurnRecall&) const = default;
};

struct FollowupRecall {
  Fraction overall;                // over the union of follow-up answers
  std::vector<TurnRecall> per_turn;  // turns that have at least one answer
};

/// Passage ids of the first `k` entries of a ranked list.
std::vector<std::string> top_k(const QuestionRun& run, std::size_t k);

/// Fraction of the instance's direct answers (deduplicated after
/// tokenisation) contained in some retrieved passage. nullopt when the
/// instance has no usable direct answers. Unknown passage ids are skipped
/// with a warning.
std::optional<Fraction> direct_answer_recall(std::span<const std::string> retrieved,
                                             const QaInstance& instance,
                                             const AnalyzedCorpus& corpus,
                                             Diagnostics& diag = Diagnostics::quiet());

/// Fraction of gold pages from which at least one passage was retrieved.
std::optional<Fraction> wikipage_recall(std::span<const std::string> retrieved,
                                        const QaInstance& instance, const AnalyzedCorpus& corpus,
                                        Diagnostics& diag = Diagnostics::quiet());

/// Later-turn answers already contained in the passages retrieved for the
/// first question, overall and per turn.
std::optional<FollowupRecall> followup_answer_recall(std::span<const std::string> retrieved,
                                                     const QaInstance& instance,
                                                     const AnalyzedCorpus& corpus,
                                                     Diagnostics& diag = Diagnostics::quiet());

struct Groundedness {
  double value = 1.0;
  bool degenerate = false;  // answer had no content tokens
  std::size_t grounded = 0;
  std::size_t total = 0;
};

/// Fraction of content-token occurrences in the answer whose type occurs in
/// the union of the passages' content tokens. Stopwords are ignored on both
/// sides. An answer without content tokens scores 1.0, flagged degenerate.
Groundedness groundedness(std::string_view answer, std::span<const TokenSet> passages,
                          const StopwordList& stopwords);
Groundedness groundedness(std::string_view answer, std::span<const std::string> passage_texts,
                          const StopwordList& stopwords);

/// Best ROUGE-L F1 of the answer against any reference; nullopt when there
/// are no references.
std::optional<double> rouge_l_vs_references(std::string_view answer,
                                            std::span<const std::string> references);

/// SQuAD-style token F1 over normalised token multisets (articles "a",
/// "an", "the" dropped). 1.0 when both sides are empty.
double token_f1(std::string_view predicted, std::string_view gold);

/// Mean over interpretations of the best token F1 against that
/// interpretation's gold answers. nullopt if no interpretation has gold
/// answers.
std::optional<double> interpretation_f1(std::span<const Extraction> extractions);

/// Geometric mean sqrt(rouge_l * d_f1); both must be >= 0.
double dr_score(double rouge_l, double d_f1);

struct QuestionMetrics {
  std::string question_id;
  std::optional<Fraction> da_recall;
  std::optional<Fraction> wikipage_recall;
  std::optional<Fraction> followup_recall;
  std::vector<TurnRecall> per_turn_hits;
  std::optional<double> groundedness;
  bool groundedness_degenerate = false;
  std::optional<double> rouge_l_f1;
  std::optional<double> token_f1;  // D-F1 component, in [0, 1]
  std::optional<double> conv_f1;   // C-F1 component, in [0, 1]
};

struct EvalInputs {
  const std::vector<GeneratedAnswer>* answers = nullptr;
  const std::vector<Extraction>* extractions = nullptr;       // D-F1
  const std::vector<Extraction>* conv_extractions = nullptr;  // C-F1
  std::vector<std::string> excluded_questions;                // e.g. failed re-ranking
};

/// Per-question metrics at depth k for every dataset question present in
/// the run, in dataset order.
std::vector<QuestionMetrics> evaluate_run(const RunFile& run, const Dataset& dataset,
                                          const AnalyzedCorpus& corpus, std::size_t k,
                                          const EvalInputs& inputs, Diagnostics& diag);

struct MetricSummary {
  std::string name;
  std::optional<double> mean;  // macro average over defined values
  std::size_t n = 0;

  bool operator==(const MetricSummary&) const = default;
};

struct TurnSummary {
  int turn_index = 2;
  double mean_recall = 0.0;
  std::size_t n = 0;

  bool operator==(const TurnSummary&) const = default;
};

struct ReportConfig {
  std::size_t k = 5;
  std::string stopword_hash;
  int tokenizer_version = kTokenizerVersion;
  std::uint64_t seed = 0;
  std::string run_label;
  bool micro = false;
};

struct MetricsReport {
  ReportConfig config;
  std::vector<QuestionMetrics> per_question;
  /// da_recall, wikipage_recall, followup_recall, groundedness (fractions);
  /// rouge_l, d_f1, c_f1 (percent).
  std::vector<MetricSummary> summary;
  std::optional<double> dr;
  std::vector<MetricSummary> micro;  // filled when config.micro
  std::vector<TurnSummary> per_turn;
  std::size_t questions = 0;
  std::vector<std::string> excluded_questions;

  const MetricSummary& metric(std::string_view name) const;
};

/// Macro averages and DR. Throws invalid_input ("no questions") for empty
/// input.
MetricsReport aggregate_report(std::vector<QuestionMetrics> per_question,
                               const ReportConfig& config,
                               std::vector<std::string> excluded_questions = {});

std::string render_report_json(const MetricsReport& report);
std::string render_report_table(const MetricsReport& report);
std::string render_per_turn_csv(const MetricsReport& report);

/// Writes <stem>.json, <stem>.txt and <stem>.per_turn.csv next to each other.
void write_report(const std::filesystem::path& stem, const MetricsReport& report);

}  // namespace lfqa
