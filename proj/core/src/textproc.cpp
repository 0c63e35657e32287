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

#include "lfqa/textproc.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <iterator>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lfqa/error.hpp"
#include "lfqa/fileio.hpp"
#include "lfqa/hashing.hpp"

namespace lfqa {

extern const char* const kBuiltinStopwords;

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      uint8_t buf[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, lower);
      current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

StopwordList::StopwordList(std::unordered_set<std::string> words, std::string source)
    : words_(std::move(words)), source_(std::move(source)) {
  std::vector<std::string> sorted(words_.begin(), words_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string joined;
  for (const auto& w : sorted) {
    joined += w;
    joined.push_back('\n');
  }
  hash_ = sha256_hex(joined);
}

StopwordList StopwordList::parse(std::string_view contents, std::string source) {
  std::unordered_set<std::string> words;
  std::size_t line_no = 0;
  while (!contents.empty()) {
    const auto nl = contents.find('\n');
    std::string_view line = contents.substr(0, nl);
    contents = nl == std::string_view::npos ? std::string_view{} : contents.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    auto tokens = tokenize(line);
    if (tokens.size() != 1) {
      throw_invalid(source + ":" + std::to_string(line_no) + ": stopword '" + std::string(line) +
                    "' is not a single token");
    }
    words.insert(std::move(tokens.front()));
  }
  return StopwordList(std::move(words), std::move(source));
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

const StopwordList& StopwordList::builtin() {
  static const StopwordList list = parse(kBuiltinStopwords, "builtin");
  return list;
}

StopwordList StopwordList::empty() { return StopwordList({}, "none"); }

bool StopwordList::contains(std::string_view token) const {
  return words_.find(std::string(token)) != words_.end();
}

TokenSet::TokenSet(std::vector<std::string> sorted_unique) : tokens_(std::move(sorted_unique)) {}

TokenSet::TokenSet(std::initializer_list<std::string_view> tokens) {
  for (auto t : tokens) tokens_.emplace_back(t);
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

TokenSet TokenSet::from_tokens(std::span<const std::string> tokens, const StopwordList& stopwords) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stopwords.contains(t)) kept.push_back(t);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return TokenSet(std::move(kept));
}

TokenSet TokenSet::from_text(std::string_view text, const StopwordList& stopwords) {
  return from_tokens(tokenize(text), stopwords);
}

bool TokenSet::contains(std::string_view token) const {
  return std::binary_search(tokens_.begin(), tokens_.end(), token, std::less<>{});
}

std::size_t TokenSet::intersection_size(const TokenSet& other) const {
  std::size_t count = 0;
  auto a = tokens_.begin();
  auto b = other.tokens_.begin();
  while (a != tokens_.end() && b != other.tokens_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++count;
      ++a;
      ++b;
    }
  }
  return count;
}

std::size_t TokenSet::union_size(const TokenSet& other) const {
  return size() + other.size() - intersection_size(other);
}

double token_recall(const TokenSet& candidate, const TokenSet& reference) {
  if (reference.empty()) throw_invalid("undefined recall: reference token set is empty");
  return static_cast<double>(candidate.intersection_size(reference)) /
         static_cast<double>(reference.size());
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  const std::size_t u = a.union_size(b);
  if (u == 0) throw_invalid("undefined jaccard similarity: both token sets are empty");
  return static_cast<double>(a.intersection_size(b)) / static_cast<double>(u);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() < b.size()) std::swap(a, b);
  constexpr std::size_t kWord = 64;
  if (b.size() <= kWord) {
    // Bit-parallel LCS over the shorter side. Its positions are bucketed:
    // tokens of at most one byte get an exact bucket each, longer tokens a
    // hashed one and are confirmed against each candidate.
    struct Buckets {
      std::array<std::uint64_t, 2048> masks;
      std::array<std::uint32_t, 2048> stamps{};
      std::uint32_t generation = 0;
    };
    thread_local Buckets buckets;
    if (++buckets.generation == 0) {
      buckets.stamps.fill(0);
      buckets.generation = 1;
    }
    const std::uint32_t generation = buckets.generation;
    auto bucket_of = [](const std::string& token) -> std::size_t {
      const std::size_t size = token.size();
      // data()[0] is the terminator for an empty token.
      const auto first = static_cast<unsigned char>(token.data()[0]);
      if (size <= 1) return (size << 8) | first;
      const auto mid = static_cast<unsigned char>(token[size / 2]);
      const auto last = static_cast<unsigned char>(token[size - 1]);
      const std::uint32_t mixed =
          (static_cast<std::uint32_t>(size) << 24 | std::uint32_t{first} << 16 |
           std::uint32_t{mid} << 8 | last) * 0x9E3779B1u;
      return 512 + (mixed >> 16) % 1536;
    };
    const std::size_t n = b.size();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = bucket_of(b[j]);
      const std::uint64_t prior = buckets.stamps[k] == generation ? buckets.masks[k] : 0;
      buckets.masks[k] = prior | (std::uint64_t{1} << j);
      buckets.stamps[k] = generation;
    }
    const std::uint64_t width = n == kWord ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::uint64_t v = width;
    for (const auto& token : a) {
      const std::size_t k = bucket_of(token);
      std::uint64_t match = buckets.stamps[k] == generation ? buckets.masks[k] : 0;
      if (token.size() > 1) {
        for (std::uint64_t bits = match; bits != 0; bits &= bits - 1) {
          const auto j = static_cast<std::size_t>(std::countr_zero(bits));
          if (b[j] != token) match &= ~(std::uint64_t{1} << j);
        }
      }
      const std::uint64_t u = v & match;
      v = ((v + u) | (v - u)) & width;
    }
    return n - static_cast<std::size_t>(std::popcount(v));
  }
  // Multi-word bit-parallel LCS with tokens interned by value.
  const std::size_t n = b.size();
  const std::size_t words = (n + kWord - 1) / kWord;
  std::unordered_map<std::string_view, std::size_t> ids;
  ids.reserve(n);
  std::vector<std::uint64_t> masks;
  for (std::size_t j = 0; j < n; ++j) {
    const auto [it, inserted] = ids.try_emplace(b[j], ids.size());
    if (inserted) masks.resize(masks.size() + words, 0);
    masks[it->second * words + j / kWord] |= std::uint64_t{1} << (j % kWord);
  }
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  const std::size_t tail_bits = n % kWord;
  const std::uint64_t tail = tail_bits == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << tail_bits) - 1;
  v.back() &= tail;
  for (const auto& token : a) {
    const auto it = ids.find(token);
    if (it == ids.end()) continue;
    const std::uint64_t* match = &masks[it->second * words];
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & match[w];
      const std::uint64_t sum = v[w] + u;
      const std::uint64_t total = sum + carry;
      carry = static_cast<std::uint64_t>(sum < v[w]) | static_cast<std::uint64_t>(total < sum);
      v[w] = total | (v[w] - u);
    }
    v.back() &= tail;
  }
  std::size_t unmatched = 0;
  for (const auto word : v) unmatched += static_cast<std::size_t>(std::popcount(word));
  return n - unmatched;
}

RougeL rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  RougeL out;
  if (candidate.empty() || reference.empty()) {
    out.degenerate = true;
    return out;
  }
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return out;
  out.precision = lcs / static_cast<double>(candidate.size());
  out.recall = lcs / static_cast<double>(reference.size());
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

bool contains_answer(std::span<const std::string> passage, std::span<const std::string> answer) {
  if (answer.empty()) throw_invalid("contains_answer: answer has no tokens");
  return std::search(passage.begin(), passage.end(), answer.begin(), answer.end()) !=
         passage.end();
}

}  // namespace lfqa
