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

#include "lfqa/silver.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

#include "jsonl.hpp"
#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/sampling.hpp"

namespace lfqa {

using jsonl::Json;

std::string_view to_string(LfaPolicy policy) {
  switch (policy) {
    case LfaPolicy::first:
      return "first";
    case LfaPolicy::concatenate:
      return "concatenate";
    case LfaPolicy::best_per_candidate:
      return "best_per_candidate";
  }
  return "unknown";
}

LfaPolicy parse_lfa_policy(std::string_view name) {
  if (name == "first") return LfaPolicy::first;
  if (name == "concatenate") return LfaPolicy::concatenate;
  if (name == "best_per_candidate") return LfaPolicy::best_per_candidate;
  throw_invalid("unknown lfa_policy '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::silver:
      return "silver";
    case SelectionMode::da_only:
      return "da_only";
    case SelectionMode::lfa_only:
      return "lfa_only";
  }
  return "unknown";
}

SelectionMode parse_selection_mode(std::string_view name) {
  if (name == "silver") return SelectionMode::silver;
  if (name == "da_only") return SelectionMode::da_only;
  if (name == "lfa_only") return SelectionMode::lfa_only;
  throw_invalid("unknown selection mode '" + std::string(name) + "'");
}

void SilverConfig::validate() const {
  if (positives_per_question < 1) throw_invalid("positives_per_question must be >= 1");
  if (positives_per_question > k) throw_invalid("positives_per_question must not exceed k");
  if (k > pool_size) throw_invalid("k must not exceed pool_size");
  if (negatives_per_question < 1) throw_invalid("negatives_per_question must be >= 1");
}

std::vector<MatchScore> score_against_lfas(Matcher& matcher, const CandidatePool& pool,
                                           const QaInstance& instance, LfaPolicy policy) {
  if (instance.long_form_answers.empty()) {
    throw_invalid("question '" + instance.id + "' has no long-form answer");
  }
  switch (policy) {
    case LfaPolicy::first:
      return matcher.score(pool, instance, instance.long_form_answers.front());
    case LfaPolicy::concatenate: {
      std::string joined;
      for (const auto& lfa : instance.long_form_answers) {
        if (!joined.empty()) joined.push_back('\n');
        joined += lfa;
      }
      return matcher.score(pool, instance, joined);
    }
    case LfaPolicy::best_per_candidate: {
      auto best = matcher.score(pool, instance, instance.long_form_answers.front());
      for (std::size_t i = 1; i < instance.long_form_answers.size(); ++i) {
        const auto next = matcher.score(pool, instance, instance.long_form_answers[i]);
        for (std::size_t j = 0; j < best.size(); ++j) {
          if (next[j].failed) continue;
          if (best[j].failed || next[j].score > best[j].score) best[j] = next[j];
        }
      }
      return best;
    }
  }
  return {};
}

namespace {

/// Pool passages with their score and rank, ordered best first.
struct Ranked {
  const std::string* id;
  double score;
  std::size_t rank;
};

bool better(const Ranked& a, const Ranked& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.rank != b.rank) return a.rank < b.rank;
  return *a.id < *b.id;
}

std::vector<Ranked> rank_pool(const CandidatePool& pool, std::span<const MatchScore> scores) {
  if (scores.size() != pool.size()) {
    throw_invalid("question '" + pool.question_id + "': " + std::to_string(scores.size()) +
                  " scores for a pool of " + std::to_string(pool.size()));
  }
  std::unordered_map<std::string_view, double> by_id;
  for (const auto& s : scores) {
    by_id[s.passage_id] = s.failed ? -std::numeric_limits<double>::infinity() : s.score;
  }
  std::vector<Ranked> ranked;
  ranked.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto it = by_id.find(pool.entries[i].passage_id);
    if (it == by_id.end()) {
      throw_invalid("question '" + pool.question_id + "': no score for passage '" +
                    pool.entries[i].passage_id + "'");
    }
    ranked.push_back(Ranked{&pool.entries[i].passage_id, it->second, i + 1});
  }
  return ranked;
}

void check_pool(const CandidatePool& pool) {
  if (pool.empty()) throw_invalid("question '" + pool.question_id + "': empty candidate pool");
}

std::vector<TokenSequence> answer_tokens(const QaInstance& instance, Diagnostics& diag) {
  std::vector<TokenSequence> out;
  out.reserve(instance.direct_answers.size());
  for (const auto& da : instance.direct_answers) {
    out.push_back(tokenize(da));
    if (out.back().empty()) {
      diag.warn("question '" + instance.id + "': direct answer '" + da +
                "' has no tokens and cannot be matched");
    }
  }
  return out;
}

void finish_selection(SilverSelection& selection, const CandidatePool& pool,
                      const QaInstance& instance, const std::vector<TokenSequence>& answers,
                      const AnalyzedCorpus& corpus, const SilverConfig& config,
                      Diagnostics& diag) {
  // Coverage: the first positive (best first) containing each answer.
  for (std::size_t a = 0; a < answers.size(); ++a) {
    std::optional<std::string> covering;
    if (!answers[a].empty()) {
      for (const auto& pid : selection.positives) {
        if (contains_answer(corpus.get(pid).tokens, answers[a])) {
          covering = pid;
          break;
        }
      }
    }
    selection.da_coverage.emplace(instance.direct_answers[a], std::move(covering));
  }

  const std::set<std::string_view> chosen(selection.positives.begin(), selection.positives.end());
  std::vector<std::string> rest;
  rest.reserve(pool.size());
  for (const auto& e : pool.entries) {
    if (!chosen.contains(e.passage_id)) rest.push_back(e.passage_id);
  }
  selection.negatives = sample_without_replacement(rest, config.negatives_per_question,
                                                   config.seed, pool.question_id);
  if (rest.size() < config.negatives_per_question) {
    diag.warn("question '" + pool.question_id + "': only " + std::to_string(rest.size()) +
              " non-positive passages available for " +
              std::to_string(config.negatives_per_question) + " negatives");
  }
  selection.seed = config.seed;
}

void record_scores(SilverSelection& selection, std::span<const MatchScore> scores) {
  for (const auto& s : scores) selection.scores.emplace(s.passage_id, s);
}

}  // namespace

SilverSelection select_silver(const CandidatePool& pool, const QaInstance& instance,
                              std::span<const MatchScore> scores, const AnalyzedCorpus& corpus,
                              const SilverConfig& config, Diagnostics& diag) {
  check_pool(pool);
  if (instance.long_form_answers.empty()) {
    throw_invalid("question '" + instance.id + "' has no long-form answer");
  }
  auto ranked = rank_pool(pool, scores);
  const auto answers = answer_tokens(instance, diag);

  // 1. Best containing passage per answer.
  std::vector<Ranked> forced;
  for (const auto& answer : answers) {
    if (answer.empty()) continue;
    const Ranked* best = nullptr;
    for (const auto& r : ranked) {
      if (!contains_answer(corpus.get(*r.id).tokens, answer)) continue;
      if (best == nullptr || better(r, *best)) best = &r;
    }
    if (best == nullptr) continue;
    const bool seen = std::any_of(forced.begin(), forced.end(),
                                  [&](const Ranked& f) { return f.id == best->id; });
    if (!seen) forced.push_back(*best);
  }

  // 2. Overflow: keep the k best forced passages.
  std::sort(forced.begin(), forced.end(), better);
  if (forced.size() > config.k) {
    diag.warn("question '" + instance.id + "': " + std::to_string(forced.size()) +
              " answer-bearing passages exceed k=" + std::to_string(config.k) +
              "; some direct answers stay uncovered");
    forced.resize(config.k);
  }

  // 3. Fill by LFA score.
  std::set<const std::string*> taken;
  for (const auto& f : forced) taken.insert(f.id);
  std::vector<Ranked> positives = forced;
  std::sort(ranked.begin(), ranked.end(), better);
  for (const auto& r : ranked) {
    if (positives.size() >= config.k) break;
    if (!taken.contains(r.id)) positives.push_back(r);
  }
  std::sort(positives.begin(), positives.end(), better);

  SilverSelection selection;
  selection.question_id = pool.question_id;
  selection.strategy = std::string(to_string(config.strategy));
  for (const auto& p : positives) selection.positives.push_back(*p.id);
  record_scores(selection, scores);
  // 4. Negatives.
  finish_selection(selection, pool, instance, answers, corpus, config, diag);
  return selection;
}

SilverSelection select_da_only(const CandidatePool& pool, const QaInstance& instance,
                               const AnalyzedCorpus& corpus, const SilverConfig& config,
                               Diagnostics& diag) {
  check_pool(pool);
  if (instance.direct_answers.empty()) {
    throw_invalid("question '" + instance.id + "' has no direct answers");
  }
  const auto recall = question_recall(pool, corpus, instance.question, diag);
  const auto ranked = rank_pool(pool, recall);
  const auto answers = answer_tokens(instance, diag);

  std::vector<Ranked> matching;
  for (const auto& r : ranked) {
    const auto& tokens = corpus.get(*r.id).tokens;
    const bool hit = std::any_of(answers.begin(), answers.end(), [&](const TokenSequence& a) {
      return !a.empty() && contains_answer(tokens, a);
    });
    if (hit) matching.push_back(r);
  }
  std::sort(matching.begin(), matching.end(), better);
  if (matching.size() > config.k) matching.resize(config.k);
  if (matching.empty()) {
    diag.warn("question '" + instance.id + "': no pool passage contains a direct answer");
  }

  SilverSelection selection;
  selection.question_id = pool.question_id;
  selection.strategy = "question_recall";
  for (const auto& m : matching) selection.positives.push_back(*m.id);
  record_scores(selection, recall);
  finish_selection(selection, pool, instance, answers, corpus, config, diag);
  return selection;
}

SilverSelection select_lfa_only(const CandidatePool& pool, const QaInstance& instance,
                                std::span<const MatchScore> scores, const AnalyzedCorpus& corpus,
                                const SilverConfig& config, Diagnostics& diag) {
  check_pool(pool);
  auto ranked = rank_pool(pool, scores);
  std::sort(ranked.begin(), ranked.end(), better);
  if (ranked.size() > config.k) ranked.resize(config.k);

  SilverSelection selection;
  selection.question_id = pool.question_id;
  selection.strategy = std::string(to_string(config.strategy));
  for (const auto& r : ranked) selection.positives.push_back(*r.id);
  record_scores(selection, scores);
  finish_selection(selection, pool, instance, answer_tokens(instance, diag), corpus, config, diag);
  return selection;
}

std::vector<TrainingPair> training_pairs(std::span<const SilverSelection> selections,
                                         const Dataset& dataset, const Corpus& corpus,
                                         const SilverConfig& config, Diagnostics& diag) {
  std::unordered_map<std::string_view, const SilverSelection*> by_question;
  for (const auto& s : selections) by_question.emplace(s.question_id, &s);
  if (by_question.size() != selections.size()) {
    throw_invalid("training data: duplicate question in selections");
  }

  auto lookup = [&](const std::string& qid, const std::string& pid) -> const Passage& {
    const Passage* p = corpus.find(pid);
    if (p == nullptr) {
      throw_invalid("training data: question '" + qid + "' references unknown passage '" + pid +
                    "'");
    }
    return *p;
  };

  std::vector<TrainingPair> pairs;
  std::size_t matched = 0;
  for (const auto& instance : dataset) {
    auto it = by_question.find(instance.id);
    if (it == by_question.end()) continue;
    ++matched;
    const SilverSelection& s = *it->second;
    const std::size_t n_pos = std::min(config.positives_per_question, s.positives.size());
    if (n_pos < config.positives_per_question) {
      diag.warn("question '" + instance.id + "': only " + std::to_string(n_pos) +
                " positive(s) available for training");
    }
    for (std::size_t i = 0; i < n_pos; ++i) {
      const Passage& p = lookup(instance.id, s.positives[i]);
      pairs.push_back(TrainingPair{instance.question, p.title, p.text, 1});
    }
    const std::size_t n_neg = std::min(config.negatives_per_question, s.negatives.size());
    for (std::size_t i = 0; i < n_neg; ++i) {
      const Passage& p = lookup(instance.id, s.negatives[i]);
      pairs.push_back(TrainingPair{instance.question, p.title, p.text, 0});
    }
  }
  if (matched != selections.size()) {
    throw_invalid("training data: selections reference questions missing from the dataset");
  }
  return pairs;
}

std::string serialize_training_pairs(std::span<const TrainingPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += jsonl::canonical_dump(Json{{"question", p.question},
                                      {"passage_title", p.passage_title},
                                      {"passage_text", p.passage_text},
                                      {"label", p.label}});
    out.push_back('\n');
  }
  return out;
}

std::size_t emit_training_data(std::span<const SilverSelection> selections,
                               const Dataset& dataset, const Corpus& corpus,
                               const SilverConfig& config, const std::filesystem::path& path,
                               Diagnostics& diag) {
  const auto pairs = training_pairs(selections, dataset, corpus, config, diag);
  write_file_atomic(path, serialize_training_pairs(pairs));
  return pairs.size();
}

std::string serialize_silver(std::span<const SilverSelection> selections) {
  std::string out;
  for (const auto& s : selections) {
    Json coverage = Json::object();
    for (const auto& [answer, pid] : s.da_coverage) {
      coverage[answer] = pid ? Json(*pid) : Json(nullptr);
    }
    Json scores = Json::object();
    for (const auto& [pid, m] : s.scores) scores[pid] = m.failed ? Json(nullptr) : Json(m.score);
    out += jsonl::canonical_dump(Json{{"question_id", s.question_id},
                                      {"positives", s.positives},
                                      {"negatives", s.negatives},
                                      {"da_coverage", coverage},
                                      {"strategy", s.strategy},
                                      {"seed", s.seed},
                                      {"scores", scores}});
    out.push_back('\n');
  }
  return out;
}

void write_silver(const std::filesystem::path& path, std::span<const SilverSelection> selections) {
  write_file_atomic(path, serialize_silver(selections));
}

std::vector<SilverSelection> load_silver(const std::filesystem::path& path) {
  std::vector<SilverSelection> out;
  const std::string file = path.string();
  jsonl::for_each_record(path, [&](const Json& record, std::size_t line) {
    jsonl::RecordReader r(record, file, line);
    SilverSelection s;
    s.question_id = r.required_string("question_id");
    s.positives = r.string_list("positives");
    s.negatives = r.string_list("negatives");
    s.strategy = r.required_string("strategy");
    const Json& seed = r.required("seed");
    if (!seed.is_number_integer()) r.fail("field 'seed' must be an integer");
    s.seed = seed.get<std::uint64_t>();
    Strategy strategy = Strategy::lexical_recall;
    if (s.strategy != "question_recall") strategy = parse_strategy(s.strategy);
    if (r.has("scores")) {
      for (const auto& [pid, value] : r.required("scores").items()) {
        MatchScore m{pid, 0.0, strategy, value.is_null()};
        if (m.failed) {
          m.score = -std::numeric_limits<double>::infinity();
        } else if (value.is_number()) {
          m.score = value.get<double>();
        } else {
          r.fail("score for '" + pid + "' must be a number or null");
        }
        s.scores.emplace(pid, std::move(m));
      }
    }
    if (r.has("da_coverage")) {
      for (const auto& [answer, pid] : r.required("da_coverage").items()) {
        s.da_coverage.emplace(answer, pid.is_string() ? std::optional<std::string>(
                                                            pid.get<std::string>())
                                                      : std::nullopt);
      }
    }
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace lfqa
