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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "lfqa/services.hpp"

namespace lfqa::mock {

/// Canned responses and fault injection for the mock model services.
/// Inputs without a fixture entry get deterministic hash-derived values.
struct MockOptions {
  std::map<std::string, std::vector<double>> embeddings;         // text -> vector
  std::map<std::string, std::vector<TokenLogProb>> logprobs;     // continuation -> tokens
  /// Checked before `logprobs`: the entry whose marker occurs latest in the
  /// prompt wins, which selects by candidate passage under the default
  /// template.
  std::vector<std::pair<std::string, std::vector<TokenLogProb>>> logprobs_by_marker;
  std::map<std::string, double> scores;                          // passage_text -> score
  std::size_t dimension = 8;
  int fail_first = 0;            // answer the first N requests with HTTP 503
  bool always_fail = false;      // answer every request with HTTP 503
  bool mismatched_tokens = false;  // log-prob tokens do not spell the continuation
  std::size_t wrong_dimension_every = 0;  // every Nth vector gets one extra component

  /// {"embeddings": {...}, "logprobs": {...}, "logprobs_by_marker": [{"marker", "tokens"}],
  ///  "scores": {...}, "dimension": n}
  static MockOptions load(const std::filesystem::path& path);
};

/// Splits text into word tokens that keep their trailing whitespace, so the
/// tokens concatenate to the input.
std::vector<std::string> split_keep_spaces(const std::string& text);

std::vector<double> hash_embedding(const std::string& text, std::size_t dimension);
double hash_logprob(const std::string& prompt, const std::string& token);
double hash_score(const std::string& question, const std::string& passage_text);

/// HTTP server exposing POST /embed, /logprobs and /score on 127.0.0.1.
class MockServer {
 public:
  explicit MockServer(MockOptions options = {}, int port = 0);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string url(const std::string& path) const;
  std::size_t requests() const { return requests_.load(); }

  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  std::thread thread_;
};

}  // namespace lfqa::mock
