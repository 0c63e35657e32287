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

#include "lfqa/analysis.hpp"

#include <vector>

#include "lfqa/parallel.hpp"

namespace lfqa {

AnalyzedCorpus::AnalyzedCorpus(const Corpus& corpus, const StopwordList& stopwords)
    : corpus_(corpus), stopwords_(stopwords) {}

const AnalyzedText& AnalyzedCorpus::get(std::string_view passage_id) const {
  std::string key(passage_id);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return *it->second;
  }
  const Passage& p = corpus_.at(passage_id);
  auto analyzed = std::make_unique<AnalyzedText>();
  analyzed->tokens = tokenize(p.text);
  analyzed->content = TokenSet::from_tokens(analyzed->tokens, stopwords_);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(std::move(key), std::move(analyzed));
  return *it->second;
}

void AnalyzedCorpus::prefetch(std::span<const std::string> passage_ids, std::size_t jobs) const {
  parallel_for(passage_ids.size(), jobs, [&](std::size_t i) {
    if (corpus_.contains(passage_ids[i])) get(passage_ids[i]);
  });
}

}  // namespace lfqa
