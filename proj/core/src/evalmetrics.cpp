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

#include "lfqa/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "jsonl.hpp"
#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"

namespace lfqa {
namespace {

using jsonl::Json;

// Tokenised, deduplicated, non-empty answer strings in first-seen order.
std::vector<TokenSequence> normalized_answers(std::span<const std::string> answers) {
  std::vector<TokenSequence> out;
  std::set<TokenSequence> seen;
  for (const auto& a : answers) {
    auto tokens = tokenize(a);
    if (tokens.empty()) continue;
    if (seen.insert(tokens).second) out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<const AnalyzedText*> known_passages(std::span<const std::string> retrieved,
                                                const AnalyzedCorpus& corpus,
                                                Diagnostics& diag) {
  std::vector<const AnalyzedText*> out;
  for (const auto& id : retrieved) {
    if (!corpus.corpus().contains(id)) {
      diag.warn("run references unknown passage '" + id + "'; skipped");
      continue;
    }
    out.push_back(&corpus.get(id));
  }
  return out;
}

Fraction count_contained(const std::vector<TokenSequence>& answers,
                         const std::vector<const AnalyzedText*>& passages) {
  Fraction f{0, answers.size()};
  for (const auto& answer : answers) {
    const bool hit = std::any_of(passages.begin(), passages.end(), [&](const AnalyzedText* p) {
      return contains_answer(p->tokens, answer);
    });
    if (hit) ++f.hits;
  }
  return f;
}

bool is_article(const std::string& t) { return t == "a" || t == "an" || t == "the"; }

std::vector<std::string> f1_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, is_article);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

MetricSummary summarize(std::string name, const std::vector<double>& values, double scale) {
  MetricSummary s{std::move(name), std::nullopt, values.size()};
  if (!values.empty()) s.mean = mean(values) * scale;
  return s;
}

MetricSummary summarize_micro(std::string name, const std::vector<Fraction>& values) {
  MetricSummary s{std::move(name), std::nullopt, values.size()};
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& f : values) {
    hits += f.hits;
    total += f.total;
  }
  if (total > 0) s.mean = static_cast<double>(hits) / static_cast<double>(total);
  return s;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

}  // namespace

std::vector<std::string> top_k(const QuestionRun& run, std::size_t k) {
  std::vector<std::string> ids;
  const std::size_t n = std::min(k, run.entries.size());
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(run.entries[i].passage_id);
  return ids;
}

std::optional<Fraction> direct_answer_recall(std::span<const std::string> retrieved,
                                             const QaInstance& instance,
                                             const AnalyzedCorpus& corpus, Diagnostics& diag) {
  const auto answers = normalized_answers(instance.direct_answers);
  if (answers.empty()) return std::nullopt;
  return count_contained(answers, known_passages(retrieved, corpus, diag));
}

std::optional<Fraction> wikipage_recall(std::span<const std::string> retrieved,
                                        const QaInstance& instance, const AnalyzedCorpus& corpus,
                                        Diagnostics& diag) {
  const std::set<std::string> gold(instance.gold_page_ids.begin(), instance.gold_page_ids.end());
  if (gold.empty()) return std::nullopt;
  std::set<std::string> found;
  for (const auto& id : retrieved) {
    const Passage* p = corpus.corpus().find(id);
    if (p == nullptr) {
      diag.warn("run references unknown passage '" + id + "'; skipped");
      continue;
    }
    if (gold.contains(p->page_id)) found.insert(p->page_id);
  }
  return Fraction{found.size(), gold.size()};
}

std::optional<FollowupRecall> followup_answer_recall(std::span<const std::string> retrieved,
                                                     const QaInstance& instance,
                                                     const AnalyzedCorpus& corpus,
                                                     Diagnostics& diag) {
  std::vector<std::string> all;
  for (const auto& f : instance.followups) all.insert(all.end(), f.answers.begin(), f.answers.end());
  const auto union_answers = normalized_answers(all);
  if (union_answers.empty()) return std::nullopt;

  const auto passages = known_passages(retrieved, corpus, diag);
  FollowupRecall out;
  out.overall = count_contained(union_answers, passages);
  for (const auto& f : instance.followups) {
    const auto answers = normalized_answers(f.answers);
    if (answers.empty()) continue;
    out.per_turn.push_back({f.turn_index, count_contained(answers, passages)});
  }
  return out;
}

Groundedness groundedness(std::string_view answer, std::span<const TokenSet> passages,
                          const StopwordList& stopwords) {
  Groundedness g;
  for (const auto& token : tokenize(answer)) {
    if (stopwords.contains(token)) continue;
    ++g.total;
    const bool found = std::any_of(passages.begin(), passages.end(),
                                   [&](const TokenSet& s) { return s.contains(token); });
    if (found) ++g.grounded;
  }
  if (g.total == 0) {
    g.degenerate = true;
    g.value = 1.0;
  } else {
    g.value = static_cast<double>(g.grounded) / static_cast<double>(g.total);
  }
  return g;
}

Groundedness groundedness(std::string_view answer, std::span<const std::string> passage_texts,
                          const StopwordList& stopwords) {
  std::vector<TokenSet> sets;
  sets.reserve(passage_texts.size());
  for (const auto& text : passage_texts) sets.push_back(TokenSet::from_text(text, stopwords));
  return groundedness(answer, std::span<const TokenSet>(sets), stopwords);
}

std::optional<double> rouge_l_vs_references(std::string_view answer,
                                            std::span<const std::string> references) {
  if (references.empty()) return std::nullopt;
  const auto candidate = tokenize(answer);
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, rouge_l(candidate, tokenize(ref)).f1);
  return best;
}

double token_f1(std::string_view predicted, std::string_view gold) {
  const auto p = f1_tokens(predicted);
  const auto g = f1_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double precision = static_cast<double>(common.size()) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common.size()) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::optional<double> interpretation_f1(std::span<const Extraction> extractions) {
  std::vector<double> scores;
  std::set<std::string> seen;
  for (const auto& e : extractions) {
    if (!seen.insert(e.interpretation_id).second) {
      throw_invalid("duplicate interpretation '" + e.interpretation_id + "' for question '" +
                    e.question_id + "'");
    }
    if (e.gold_answers.empty()) continue;
    double best = 0.0;
    for (const auto& gold : e.gold_answers) best = std::max(best, token_f1(e.extracted_span, gold));
    scores.push_back(best);
  }
  if (scores.empty()) return std::nullopt;
  return mean(scores);
}

double dr_score(double rouge_l, double d_f1) {
  if (!(rouge_l >= 0.0) || !(d_f1 >= 0.0)) throw_invalid("DR components must be non-negative");
  return std::sqrt(rouge_l * d_f1);
}

std::vector<QuestionMetrics> evaluate_run(const RunFile& run, const Dataset& dataset,
                                          const AnalyzedCorpus& corpus, std::size_t k,
                                          const EvalInputs& inputs, Diagnostics& diag) {
  if (k == 0) throw_invalid("k must be positive");

  std::unordered_map<std::string, const GeneratedAnswer*> answers;
  if (inputs.answers != nullptr) {
    for (const auto& a : *inputs.answers) {
      if (!answers.emplace(a.question_id, &a).second) {
        diag.warn("duplicate answer for question '" + a.question_id + "'; keeping the first");
      }
    }
  }
  auto group = [](const std::vector<Extraction>* records) {
    std::map<std::string, std::vector<Extraction>> by_question;
    if (records != nullptr) {
      for (const auto& e : *records) by_question[e.question_id].push_back(e);
    }
    return by_question;
  };
  const auto extractions = group(inputs.extractions);
  const auto conv_extractions = group(inputs.conv_extractions);
  const std::set<std::string> excluded(inputs.excluded_questions.begin(),
                                       inputs.excluded_questions.end());

  std::vector<QuestionMetrics> out;
  std::size_t shallow = 0;
  std::size_t missing = 0;
  for (const auto& instance : dataset) {
    if (excluded.contains(instance.id)) continue;
    const QuestionRun* qrun = run.find(instance.id);
    if (qrun == nullptr) {
      ++missing;
      continue;
    }
    if (qrun->entries.size() < k) ++shallow;
    const auto retrieved = top_k(*qrun, k);

    QuestionMetrics m;
    m.question_id = instance.id;
    m.da_recall = direct_answer_recall(retrieved, instance, corpus, diag);
    m.wikipage_recall = wikipage_recall(retrieved, instance, corpus, Diagnostics::quiet());
    if (auto fr = followup_answer_recall(retrieved, instance, corpus, Diagnostics::quiet())) {
      m.followup_recall = fr->overall;
      m.per_turn_hits = std::move(fr->per_turn);
    }

    if (auto it = answers.find(instance.id); it != answers.end()) {
      std::vector<TokenSet> sets;
      for (const auto& id : retrieved) {
        if (corpus.corpus().contains(id)) sets.push_back(corpus.get(id).content);
      }
      const auto g = groundedness(it->second->text, std::span<const TokenSet>(sets),
                                  corpus.stopwords());
      m.groundedness = g.value;
      m.groundedness_degenerate = g.degenerate;
      m.rouge_l_f1 = rouge_l_vs_references(it->second->text, instance.long_form_answers);
    }
    if (auto it = extractions.find(instance.id); it != extractions.end()) {
      m.token_f1 = interpretation_f1(it->second);
    }
    if (auto it = conv_extractions.find(instance.id); it != conv_extractions.end()) {
      m.conv_f1 = interpretation_f1(it->second);
    }
    out.push_back(std::move(m));
  }
  if (missing > 0) {
    diag.warn(std::to_string(missing) + " dataset question(s) have no ranked list; skipped");
  }
  if (shallow > 0) {
    diag.warn("k=" + std::to_string(k) + " exceeds the run depth for " + std::to_string(shallow) +
              " question(s); evaluated at the available depth");
  }
  return out;
}

const MetricSummary& MetricsReport::metric(std::string_view name) const {
  for (const auto& s : summary) {
    if (s.name == name) return s;
  }
  throw_invalid("unknown metric '" + std::string(name) + "'");
}

MetricsReport aggregate_report(std::vector<QuestionMetrics> per_question,
                               const ReportConfig& config,
                               std::vector<std::string> excluded_questions) {
  if (per_question.empty()) throw Error(ErrorKind::no_work, "no questions to evaluate");

  std::vector<double> da, page, followup, grounded, rouge, df1, cf1;
  std::vector<Fraction> da_f, page_f, followup_f;
  std::map<int, std::vector<double>> turns;
  for (const auto& m : per_question) {
    if (m.da_recall) {
      da.push_back(m.da_recall->value());
      da_f.push_back(*m.da_recall);
    }
    if (m.wikipage_recall) {
      page.push_back(m.wikipage_recall->value());
      page_f.push_back(*m.wikipage_recall);
    }
    if (m.followup_recall) {
      followup.push_back(m.followup_recall->value());
      followup_f.push_back(*m.followup_recall);
    }
    for (const auto& t : m.per_turn_hits) turns[t.turn_index].push_back(t.fraction.value());
    if (m.groundedness) grounded.push_back(*m.groundedness);
    if (m.rouge_l_f1) rouge.push_back(*m.rouge_l_f1);
    if (m.token_f1) df1.push_back(*m.token_f1);
    if (m.conv_f1) cf1.push_back(*m.conv_f1);
  }

  MetricsReport report;
  report.config = config;
  report.questions = per_question.size();
  report.excluded_questions = std::move(excluded_questions);
  report.summary = {
      summarize("da_recall", da, 1.0),         summarize("wikipage_recall", page, 1.0),
      summarize("followup_recall", followup, 1.0), summarize("groundedness", grounded, 1.0),
      summarize("rouge_l", rouge, 100.0),      summarize("d_f1", df1, 100.0),
      summarize("c_f1", cf1, 100.0),
  };
  const auto& r = report.metric("rouge_l");
  const auto& d = report.metric("d_f1");
  if (r.mean && d.mean) report.dr = dr_score(*r.mean, *d.mean);
  if (config.micro) {
    report.micro = {summarize_micro("da_recall", da_f), summarize_micro("wikipage_recall", page_f),
                    summarize_micro("followup_recall", followup_f)};
  }
  for (const auto& [turn, values] : turns) {
    report.per_turn.push_back({turn, mean(values), values.size()});
  }
  report.per_question = std::move(per_question);
  return report;
}

std::string render_report_json(const MetricsReport& report) {
  Json j;
  j["config"] = {{"k", report.config.k},
                 {"stopword_hash", report.config.stopword_hash},
                 {"tokenizer_version", report.config.tokenizer_version},
                 {"seed", report.config.seed},
                 {"run", report.config.run_label}};
  j["questions"] = report.questions;
  j["excluded_questions"] = report.excluded_questions;

  Json summary = Json::object();
  for (const auto& s : report.summary) summary[s.name] = {{"mean", optional_number(s.mean)}, {"n", s.n}};
  j["summary"] = std::move(summary);
  j["dr"] = optional_number(report.dr);
  if (report.config.micro) {
    Json micro = Json::object();
    for (const auto& s : report.micro) micro[s.name] = {{"mean", optional_number(s.mean)}, {"n", s.n}};
    j["micro"] = std::move(micro);
  }

  Json turns = Json::array();
  for (const auto& t : report.per_turn) {
    turns.push_back({{"turn_index", t.turn_index}, {"mean_recall", t.mean_recall}, {"n", t.n}});
  }
  j["per_turn"] = std::move(turns);

  Json rows = Json::array();
  for (const auto& m : report.per_question) {
    Json row = {{"question_id", m.question_id}};
    if (m.da_recall) row["da_recall"] = m.da_recall->value();
    if (m.wikipage_recall) row["wikipage_recall"] = m.wikipage_recall->value();
    if (m.followup_recall) {
      row["followup_recall"] = m.followup_recall->value();
      Json per_turn = Json::array();
      for (const auto& t : m.per_turn_hits) {
        per_turn.push_back({{"turn_index", t.turn_index}, {"recall", t.fraction.value()}});
      }
      row["per_turn"] = std::move(per_turn);
    }
    if (m.groundedness) {
      row["groundedness"] = *m.groundedness;
      row["groundedness_degenerate"] = m.groundedness_degenerate;
    }
    if (m.rouge_l_f1) row["rouge_l"] = *m.rouge_l_f1;
    if (m.token_f1) row["d_f1"] = *m.token_f1;
    if (m.conv_f1) row["c_f1"] = *m.conv_f1;
    rows.push_back(std::move(row));
  }
  j["per_question"] = std::move(rows);
  return jsonl::canonical_dump(j) + "\n";
}

std::string render_report_table(const MetricsReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "k=%zu questions=%zu excluded=%zu\n", report.config.k,
                report.questions, report.excluded_questions.size());
  out += line;
  std::snprintf(line, sizeof line, "%-18s %10s %6s\n", "metric", "value", "n");
  out += line;
  for (const auto& s : report.summary) {
    const bool percent = s.name == "rouge_l" || s.name == "d_f1" || s.name == "c_f1";
    const std::string value = s.mean ? format_fixed(*s.mean, percent ? 1 : 3) : "n/a";
    std::snprintf(line, sizeof line, "%-18s %10s %6zu\n", s.name.c_str(), value.c_str(), s.n);
    out += line;
  }
  const std::string dr = report.dr ? format_fixed(*report.dr, 1) : "n/a";
  std::snprintf(line, sizeof line, "%-18s %10s %6s\n", "dr", dr.c_str(), "-");
  out += line;
  for (const auto& s : report.micro) {
    const std::string name = "micro_" + s.name;
    const std::string value = s.mean ? format_fixed(*s.mean, 3) : "n/a";
    std::snprintf(line, sizeof line, "%-18s %10s %6zu\n", name.c_str(), value.c_str(), s.n);
    out += line;
  }
  return out;
}

std::string render_per_turn_csv(const MetricsReport& report) {
  std::string out = "turn_index,mean_recall,n\n";
  for (const auto& t : report.per_turn) {
    out += std::to_string(t.turn_index) + "," + jsonl::format_double(t.mean_recall) + "," +
           std::to_string(t.n) + "\n";
  }
  return out;
}

void write_report(const std::filesystem::path& stem, const MetricsReport& report) {
  auto with_suffix = [&](const char* suffix) {
    auto p = stem;
    p += suffix;
    return p;
  };
  write_file_atomic(with_suffix(".json"), render_report_json(report));
  write_file_atomic(with_suffix(".txt"), render_report_table(report));
  write_file_atomic(with_suffix(".per_turn.csv"), render_per_turn_csv(report));
}

}  // namespace lfqa
