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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/textproc.hpp"

namespace lfqa {

struct RetrievalConfig {
  std::size_t pool_size = 100;
  double k1 = 0.9;
  double b = 0.4;

  /// Throws invalid_input unless pool_size >= 1, k1 >= 0 and 0 <= b <= 1.
  void validate() const;
};

enum class PoolSource { builtin_bm25, ingested_run };

std::string_view to_string(PoolSource source);

struct PoolEntry {
  std::string passage_id;
  double score = 0.0;

  bool operator==(const PoolEntry&) const = default;
};

/// First-stage candidates for one question, best first. Ties on score are
/// ordered by passage id.
struct CandidatePool {
  std::string question_id;
  std::vector<PoolEntry> entries;
  PoolSource source = PoolSource::builtin_bm25;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<std::string> passage_ids() const;

  bool operator==(const CandidatePool&) const = default;
};

struct Posting {
  std::uint32_t doc = 0;  // ordinal into the id-sorted passage list
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 over stopword-filtered passage text:
///
///   idf(t)    = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d)   = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
///   score(q,d) = sum of w(t, d) over the distinct query terms t
///
/// Distinct query terms are summed in lexicographic order so the floating
/// point result is reproducible. Immutable after build or load; safe for
/// concurrent queries.
class InvertedIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  static InvertedIndex build(const Corpus& corpus, const StopwordList& stopwords, double k1,
                             double b, std::size_t jobs = 1);

  static InvertedIndex load(const std::filesystem::path& path);
  static InvertedIndex deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  /// Top `pool_size` passages by BM25; ties by passage id. A question with
  /// no indexable tokens yields an empty pool and a warning.
  CandidatePool retrieve(std::string_view question_id, std::string_view question,
                         std::size_t pool_size, const StopwordList& stopwords,
                         Diagnostics& diag) const;

  /// Query terms as retrieve() uses them: tokenised, stopwords removed,
  /// distinct, sorted.
  static std::vector<std::string> query_terms(std::string_view question,
                                              const StopwordList& stopwords);

  /// BM25 score of one passage for already-prepared query terms.
  double score(std::span<const std::string> terms, std::string_view passage_id) const;

  double k1() const { return k1_; }
  double b() const { return b_; }
  std::uint32_t tokenizer_version() const { return tokenizer_version_; }
  const std::string& stopword_hash() const { return stopword_hash_; }
  const std::string& corpus_hash() const { return corpus_hash_; }

  std::size_t num_passages() const { return doc_ids_.size(); }
  std::size_t num_terms() const { return terms_.size(); }
  double average_length() const { return avg_length_; }
  std::uint32_t passage_length(std::string_view passage_id) const;
  std::size_t document_frequency(std::string_view term) const;
  std::span<const Posting> postings(std::string_view term) const;
  const std::vector<std::string>& passage_ids() const { return doc_ids_; }

  bool operator==(const InvertedIndex&) const = default;

 private:
  double idf(std::size_t df) const;
  double term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const;
  std::size_t term_slot(std::string_view term) const;  // terms_.size() if absent
  std::size_t doc_ordinal(std::string_view passage_id) const;
  void finalize();

  double k1_ = 0.9;
  double b_ = 0.4;
  std::uint32_t tokenizer_version_ = kTokenizerVersion;
  std::string stopword_hash_;
  std::string corpus_hash_;
  std::vector<std::string> doc_ids_;        // sorted
  std::vector<std::uint32_t> doc_lengths_;  // parallel to doc_ids_
  std::vector<std::string> terms_;          // sorted
  std::vector<std::vector<Posting>> postings_;  // parallel to terms_, doc ascending
  double avg_length_ = 0.0;
};

/// Candidate pools from an external run (e.g. a dense retriever). Each
/// question keeps its first `pool_size` entries. Scores must be
/// non-increasing in rank order ("rank/score inconsistency" otherwise);
/// equal-score entries are re-ordered by passage id. Questions unknown to
/// `dataset` (when given) and pools shorter than `pool_size` raise warnings.
std::vector<CandidatePool> ingest_run(const RunFile& run, std::size_t pool_size,
                                      const Dataset* dataset, Diagnostics& diag);

/// Pools as a run file (ranks from pool order).
RunFile pools_to_run(std::span<const CandidatePool> pools);

}  // namespace lfqa
