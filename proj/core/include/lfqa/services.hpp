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

// Clients for the external model services. All three speak JSON over HTTP
// POST; the exact wire contracts are documented in docs/service-contracts.md.

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

struct TokenLogProb {
  std::string token;
  double logprob = 0.0;  // finite, <= 0

  bool operator==(const TokenLogProb&) const = default;
};

struct ScoringPair {
  std::string question;
  std::string passage_title;
  std::string passage_text;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds timeout{30000};
};

/// Text → vector. Responses are positionally aligned with the request.
class EmbeddingService {
 public:
  virtual ~EmbeddingService() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

/// Per-token log-probabilities of `continuation` given `prompt`.
class LogProbService {
 public:
  virtual ~LogProbService() = default;
  virtual std::vector<TokenLogProb> logprobs(const std::string& prompt,
                                             const std::string& continuation) = 0;
};

/// Relevance scores for (question, passage) pairs, positionally aligned.
class ScoringService {
 public:
  virtual ~ScoringService() = default;
  virtual std::vector<double> score(std::span<const ScoringPair> pairs) = 0;
};

/// Parsed "http://host:port/path" endpoint.
struct Endpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/embed"

  static Endpoint parse(std::string_view url);
  std::string url() const { return scheme_host_port + path; }
};

/// Each failed call raises ErrorKind::service after the retry budget is
/// spent. Transport errors and 5xx responses are retried with exponential
/// backoff; 4xx responses and malformed bodies fail immediately.
/// Safe to share between threads.
std::unique_ptr<EmbeddingService> make_http_embedding_service(const Endpoint& endpoint,
                                                              RetryPolicy policy);
std::unique_ptr<LogProbService> make_http_logprob_service(const Endpoint& endpoint,
                                                          RetryPolicy policy);
std::unique_ptr<ScoringService> make_http_scoring_service(const Endpoint& endpoint,
                                                          RetryPolicy policy);

}  // namespace lfqa
