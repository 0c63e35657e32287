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

#include "lfqa/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>

#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/parallel.hpp"

namespace lfqa {

void RetrievalConfig::validate() const {
  if (pool_size < 1) throw_invalid("retrieval pool_size must be >= 1");
  if (!(k1 >= 0.0)) throw_invalid("BM25 k1 must be >= 0");
  if (!(b >= 0.0 && b <= 1.0)) throw_invalid("BM25 b must lie in [0, 1]");
}

std::string_view to_string(PoolSource source) {
  return source == PoolSource::builtin_bm25 ? "builtin_bm25" : "ingested_run";
}

std::vector<std::string> CandidatePool::passage_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.passage_id);
  return ids;
}

namespace {

constexpr char kMagic[8] = {'L', 'F', 'Q', 'A', 'B', 'M', '2', '5'};

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }
  template <typename T>
  void le(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
  }
  void f64(double value) { le(std::bit_cast<std::uint64_t>(value)); }
  void str(std::string_view s) {
    le(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw_invalid("index file is truncated");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::string> InvertedIndex::query_terms(std::string_view question,
                                                    const StopwordList& stopwords) {
  return TokenSet::from_text(question, stopwords).tokens();
}

InvertedIndex InvertedIndex::build(const Corpus& corpus, const StopwordList& stopwords, double k1,
                                   double b, std::size_t jobs) {
  if (corpus.empty()) throw_invalid("cannot build an index over an empty corpus");
  RetrievalConfig{1, k1, b}.validate();

  InvertedIndex index;
  index.k1_ = k1;
  index.b_ = b;
  index.stopword_hash_ = stopwords.hash();
  index.corpus_hash_ = corpus.content_hash();

  std::vector<const Passage*> ordered;
  ordered.reserve(corpus.size());
  for (const auto& p : corpus.passages()) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Passage* x, const Passage* y) { return x->id < y->id; });

  // Per-passage term counts in parallel, merged in ordinal order below.
  std::vector<std::map<std::string, std::uint32_t>> counts(ordered.size());
  index.doc_lengths_.assign(ordered.size(), 0);
  parallel_for(ordered.size(), jobs, [&](std::size_t d) {
    std::uint32_t length = 0;
    for (auto& token : tokenize(ordered[d]->text)) {
      if (stopwords.contains(token)) continue;
      ++counts[d][std::move(token)];
      ++length;
    }
    index.doc_lengths_[d] = length;
  });

  std::map<std::string, std::vector<Posting>> merged;
  std::uint64_t total_length = 0;
  index.doc_ids_.reserve(ordered.size());
  for (std::size_t d = 0; d < ordered.size(); ++d) {
    index.doc_ids_.push_back(ordered[d]->id);
    total_length += index.doc_lengths_[d];
    for (const auto& [term, tf] : counts[d]) {
      merged[term].push_back(Posting{static_cast<std::uint32_t>(d), tf});
    }
  }
  index.terms_.reserve(merged.size());
  index.postings_.reserve(merged.size());
  for (auto& [term, list] : merged) {
    index.terms_.push_back(term);
    index.postings_.push_back(std::move(list));
  }
  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  std::uint64_t total = 0;
  for (auto len : doc_lengths_) total += len;
  avg_length_ = doc_ids_.empty()
                    ? 0.0
                    : static_cast<double>(total) / static_cast<double>(doc_ids_.size());
}

std::string InvertedIndex::serialize() const {
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.le(kFormatVersion);
  w.f64(k1_);
  w.f64(b_);
  w.le(tokenizer_version_);
  w.str(stopword_hash_);
  w.str(corpus_hash_);
  w.le(static_cast<std::uint64_t>(doc_ids_.size()));
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    w.str(doc_ids_[d]);
    w.le(doc_lengths_[d]);
  }
  w.le(static_cast<std::uint64_t>(terms_.size()));
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    w.str(terms_[t]);
    w.le(static_cast<std::uint64_t>(postings_[t].size()));
    for (const auto& p : postings_[t]) {
      w.le(p.doc);
      w.le(p.tf);
    }
  }
  return w.take();
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (std::memcmp(r.bytes(sizeof kMagic).data(), kMagic, sizeof kMagic) != 0) {
    throw_invalid("not an lfqa BM25 index (bad magic)");
  }
  const auto version = r.le<std::uint32_t>();
  if (version != kFormatVersion) {
    throw_invalid("unsupported index format version " + std::to_string(version));
  }
  InvertedIndex index;
  index.k1_ = r.f64();
  index.b_ = r.f64();
  index.tokenizer_version_ = r.le<std::uint32_t>();
  index.stopword_hash_ = r.str();
  index.corpus_hash_ = r.str();
  const auto n_docs = r.le<std::uint64_t>();
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    index.doc_ids_.push_back(r.str());
    index.doc_lengths_.push_back(r.le<std::uint32_t>());
  }
  const auto n_terms = r.le<std::uint64_t>();
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    index.terms_.push_back(r.str());
    const auto n = r.le<std::uint64_t>();
    std::vector<Posting> list;
    list.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, bytes.size() / 8)));
    for (std::uint64_t i = 0; i < n; ++i) {
      Posting p;
      p.doc = r.le<std::uint32_t>();
      p.tf = r.le<std::uint32_t>();
      if (p.doc >= n_docs) throw_invalid("index posting references an unknown passage");
      list.push_back(p);
    }
    index.postings_.push_back(std::move(list));
  }
  if (!r.done()) throw_invalid("index file has trailing bytes");
  index.finalize();
  return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  return deserialize(read_text_file(path));
}

std::size_t InvertedIndex::term_slot(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term, std::less<>{});
  if (it == terms_.end() || *it != term) return terms_.size();
  return static_cast<std::size_t>(it - terms_.begin());
}

std::size_t InvertedIndex::doc_ordinal(std::string_view passage_id) const {
  auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), passage_id, std::less<>{});
  if (it == doc_ids_.end() || *it != passage_id) {
    throw_invalid("passage '" + std::string(passage_id) + "' is not in the index");
  }
  return static_cast<std::size_t>(it - doc_ids_.begin());
}

std::uint32_t InvertedIndex::passage_length(std::string_view passage_id) const {
  return doc_lengths_[doc_ordinal(passage_id)];
}

std::size_t InvertedIndex::document_frequency(std::string_view term) const {
  const auto slot = term_slot(term);
  return slot == terms_.size() ? 0 : postings_[slot].size();
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  const auto slot = term_slot(term);
  if (slot == terms_.size()) return {};
  return postings_[slot];
}

double InvertedIndex::idf(std::size_t df) const {
  const auto n = static_cast<double>(doc_ids_.size());
  const auto f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

double InvertedIndex::term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const {
  const auto f = static_cast<double>(tf);
  const double norm = k1_ * (1.0 - b_ + b_ * (static_cast<double>(doc_length) / avg_length_));
  return idf * ((f * (k1_ + 1.0)) / (f + norm));
}

double InvertedIndex::score(std::span<const std::string> terms,
                            std::string_view passage_id) const {
  const auto d = static_cast<std::uint32_t>(doc_ordinal(passage_id));
  double total = 0.0;
  for (const auto& term : terms) {
    const auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), d,
                               [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
    if (it == list.end() || it->doc != d) continue;
    total += term_weight(idf(list.size()), it->tf, doc_lengths_[d]);
  }
  return total;
}

CandidatePool InvertedIndex::retrieve(std::string_view question_id, std::string_view question,
                                      std::size_t pool_size, const StopwordList& stopwords,
                                      Diagnostics& diag) const {
  CandidatePool pool;
  pool.question_id = std::string(question_id);
  pool.source = PoolSource::builtin_bm25;
  const auto terms = query_terms(question, stopwords);
  if (terms.empty()) {
    diag.warn("question '" + pool.question_id + "' has no indexable tokens; empty pool");
    return pool;
  }

  // Term-at-a-time accumulation. Terms are visited in sorted order, so each
  // passage's sum is formed in the same order as score().
  std::unordered_map<std::uint32_t, double> accumulator;
  for (const auto& term : terms) {
    const auto slot = term_slot(term);
    if (slot == terms_.size()) continue;
    const double term_idf = idf(postings_[slot].size());
    for (const auto& p : postings_[slot]) {
      accumulator[p.doc] += term_weight(term_idf, p.tf, doc_lengths_[p.doc]);
    }
  }

  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(accumulator.size());
  for (const auto& [doc, value] : accumulator) scored.emplace_back(value, doc);
  auto better = [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return doc_ids_[x.second] < doc_ids_[y.second];
  };
  const std::size_t keep = std::min(pool_size, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  pool.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    pool.entries.push_back(PoolEntry{doc_ids_[scored[i].second], scored[i].first});
  }
  return pool;
}

std::vector<CandidatePool> ingest_run(const RunFile& run, std::size_t pool_size,
                                      const Dataset* dataset, Diagnostics& diag) {
  if (pool_size < 1) throw_invalid("pool_size must be >= 1");
  std::vector<CandidatePool> pools;
  pools.reserve(run.size());
  for (const auto& q : run.questions()) {
    for (std::size_t i = 1; i < q.entries.size(); ++i) {
      if (q.entries[i].score > q.entries[i - 1].score) {
        throw_invalid("question '" + q.question_id + "': rank/score inconsistency at rank " +
                      std::to_string(q.entries[i].rank));
      }
    }
    if (dataset != nullptr && dataset->find(q.question_id) == nullptr) {
      diag.warn("run question '" + q.question_id + "' is not in the dataset; pool kept");
    }
    CandidatePool pool;
    pool.question_id = q.question_id;
    pool.source = PoolSource::ingested_run;
    for (const auto& e : q.entries) pool.entries.push_back(PoolEntry{e.passage_id, e.score});
    std::stable_sort(pool.entries.begin(), pool.entries.end(),
                     [](const PoolEntry& a, const PoolEntry& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.passage_id < b.passage_id;
                     });
    if (pool.entries.size() > pool_size) {
      pool.entries.resize(pool_size);
    } else if (pool.entries.size() < pool_size) {
      diag.warn("question '" + q.question_id + "': run has " +
                std::to_string(pool.entries.size()) + " entries, fewer than pool_size " +
                std::to_string(pool_size));
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

RunFile pools_to_run(std::span<const CandidatePool> pools) {
  RunFile run;
  for (const auto& pool : pools) {
    QuestionRun q{pool.question_id, {}};
    int rank = 0;
    for (const auto& e : pool.entries) q.entries.push_back(RunEntry{e.passage_id, e.score, ++rank});
    run.add(std::move(q));
  }
  return run;
}

}  // namespace lfqa
