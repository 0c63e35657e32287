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
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace lfqa {

/// Bumped whenever tokenize() output could change for some input. Recorded
/// in index files and reports.
inline constexpr int kTokenizerVersion = 1;

/// Normalised tokens in text order: lowercase, non-empty, no separators.
using TokenSequence = std::vector<std::string>;

/// Lowercases and splits on every maximal run of characters that are not
/// Unicode letters or digits. No stemming. Invalid UTF-8 bytes separate.
TokenSequence tokenize(std::string_view text);

class StopwordList {
 public:
  /// The English list compiled into the library (data/stopwords_en.txt).
  static const StopwordList& builtin();

  /// One token per line; blank lines and lines starting with '#' are
  /// skipped. Entries are lowercased; entries that do not tokenise to
  /// exactly one token are rejected.
  static StopwordList parse(std::string_view contents, std::string source);
  static StopwordList load(const std::filesystem::path& path);

  static StopwordList empty();

  bool contains(std::string_view token) const;
  std::size_t size() const { return words_.size(); }
  const std::string& source() const { return source_; }

  /// SHA-256 of the sorted entries, newline-joined.
  const std::string& hash() const { return hash_; }

 private:
  StopwordList(std::unordered_set<std::string> words, std::string source);

  std::unordered_set<std::string> words_;
  std::string source_;
  std::string hash_;
};

/// Unique tokens after stopword removal, kept sorted for linear-time set
/// operations.
class TokenSet {
 public:
  TokenSet() = default;
  TokenSet(std::initializer_list<std::string_view> tokens);

  static TokenSet from_tokens(std::span<const std::string> tokens, const StopwordList& stopwords);
  static TokenSet from_text(std::string_view text, const StopwordList& stopwords);

  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t intersection_size(const TokenSet& other) const;
  std::size_t union_size(const TokenSet& other) const;

  bool operator==(const TokenSet&) const = default;

 private:
  explicit TokenSet(std::vector<std::string> sorted_unique);
  std::vector<std::string> tokens_;
};

/// |candidate ∩ reference| / |reference|. Throws invalid_input ("undefined
/// recall") for an empty reference.
double token_recall(const TokenSet& candidate, const TokenSet& reference);

/// |a ∩ b| / |a ∪ b|. Throws invalid_input when both are empty.
double jaccard(const TokenSet& a, const TokenSet& b);

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // an input was empty

  bool operator==(const RougeL&) const = default;
};

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Whole-text LCS based ROUGE-L with beta = 1. Stopwords are kept.
RougeL rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

/// True iff `answer` occurs as a contiguous run inside `passage`. Throws
/// invalid_input for an empty answer.
bool contains_answer(std::span<const std::string> passage, std::span<const std::string> answer);

}  // namespace lfqa
