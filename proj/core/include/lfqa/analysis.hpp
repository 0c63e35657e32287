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

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lfqa/corpus.hpp"
#include "lfqa/textproc.hpp"

namespace lfqa {

/// Token views of one passage body: the full sequence (for containment and
/// ROUGE-L) and the stopword-free set (for recall, Jaccard, groundedness).
struct AnalyzedText {
  TokenSequence tokens;
  TokenSet content;
};

/// Tokenises corpus passages on first use and keeps the result. Matching
/// and evaluation look at the passage text only; titles are not tokenised.
/// Concurrent lookups are safe; returned references stay valid for the
/// lifetime of the object.
class AnalyzedCorpus {
 public:
  AnalyzedCorpus(const Corpus& corpus, const StopwordList& stopwords);

  const Corpus& corpus() const { return corpus_; }
  const StopwordList& stopwords() const { return stopwords_; }

  /// Throws invalid_input for an id that is not in the corpus.
  const AnalyzedText& get(std::string_view passage_id) const;
  const Passage& passage(std::string_view passage_id) const { return corpus_.at(passage_id); }

  /// Analyses the given passages up front using `jobs` threads.
  void prefetch(std::span<const std::string> passage_ids, std::size_t jobs) const;

 private:
  const Corpus& corpus_;
  const StopwordList& stopwords_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::unique_ptr<AnalyzedText>> cache_;
};

}  // namespace lfqa
