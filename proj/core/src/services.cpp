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

#include "lfqa/services.hpp"

#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lfqa/error.hpp"

namespace lfqa {

using Json = nlohmann::json;

Endpoint Endpoint::parse(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw_invalid("service URL '" + std::string(url) + "' lacks a scheme (http://...)");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http") {
    throw_invalid("service URL '" + std::string(url) + "': only http:// is supported");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  if (path_start == std::string_view::npos) {
    e.scheme_host_port = std::string(url);
    e.path = "/";
  } else {
    e.scheme_host_port = std::string(url.substr(0, path_start));
    e.path = std::string(url.substr(path_start));
  }
  if (e.scheme_host_port.size() <= scheme_end + 3) {
    throw_invalid("service URL '" + std::string(url) + "' has no host");
  }
  return e;
}

namespace {

class JsonPoster {
 public:
  JsonPoster(Endpoint endpoint, RetryPolicy policy)
      : endpoint_(std::move(endpoint)), policy_(policy) {}

  Json post(const Json& body) const {
    const std::string payload = body.dump();
    auto backoff = policy_.initial_backoff;
    std::string last_error;
    const int attempts = std::max(1, policy_.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      httplib::Client client(endpoint_.scheme_host_port);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
      const auto usecs =
          std::chrono::duration_cast<std::chrono::microseconds>(policy_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      auto result = client.Post(endpoint_.path, payload, "application/json");
      if (!result) {
        last_error = "transport error: " + httplib::to_string(result.error());
      } else if (result->status >= 500) {
        last_error = "HTTP " + std::to_string(result->status);
      } else if (result->status != 200) {
        throw_service(endpoint_.url() + ": HTTP " + std::to_string(result->status) + ": " +
                      result->body.substr(0, 200));
      } else {
        try {
          return Json::parse(result->body);
        } catch (const Json::parse_error&) {
          throw_service(endpoint_.url() + ": response is not valid JSON");
        }
      }
      if (attempt < attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(
            std::llround(static_cast<double>(backoff.count()) * policy_.backoff_multiplier)));
      }
    }
    throw_service(endpoint_.url() + ": giving up after " + std::to_string(attempts) +
                  " attempt(s): " + last_error);
  }

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Endpoint endpoint_;
  RetryPolicy policy_;
};

const Json& field(const Json& body, const char* key, const Endpoint& endpoint) {
  auto it = body.find(key);
  if (!body.is_object() || it == body.end()) {
    throw_service(endpoint.url() + ": response lacks '" + key + "'");
  }
  return *it;
}

double finite_number(const Json& v, const Endpoint& endpoint) {
  if (!v.is_number()) throw_service(endpoint.url() + ": expected a number in response");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw_service(endpoint.url() + ": non-finite number in response");
  return d;
}

class HttpEmbeddingService final : public EmbeddingService {
 public:
  HttpEmbeddingService(Endpoint e, RetryPolicy p) : poster_(std::move(e), p) {}

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
    Json request{{"texts", Json::array()}};
    for (const auto& t : texts) request["texts"].push_back(t);
    const Json response = poster_.post(request);
    const Json& vectors = field(response, "vectors", poster_.endpoint());
    if (!vectors.is_array() || vectors.size() != texts.size()) {
      throw_service(poster_.endpoint().url() + ": expected " + std::to_string(texts.size()) +
                    " vectors");
    }
    std::vector<std::vector<double>> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
      if (!v.is_array()) throw_service(poster_.endpoint().url() + ": vector is not a list");
      std::vector<double> components;
      components.reserve(v.size());
      for (const auto& x : v) components.push_back(finite_number(x, poster_.endpoint()));
      out.push_back(std::move(components));
    }
    return out;
  }

 private:
  JsonPoster poster_;
};

class HttpLogProbService final : public LogProbService {
 public:
  HttpLogProbService(Endpoint e, RetryPolicy p) : poster_(std::move(e), p) {}

  std::vector<TokenLogProb> logprobs(const std::string& prompt,
                                     const std::string& continuation) override {
    const Json response = poster_.post(Json{{"prompt", prompt}, {"continuation", continuation}});
    const Json& items = field(response, "token_logprobs", poster_.endpoint());
    if (!items.is_array()) throw_service(poster_.endpoint().url() + ": token_logprobs not a list");
    std::vector<TokenLogProb> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      const Json& token = field(item, "token", poster_.endpoint());
      if (!token.is_string()) throw_service(poster_.endpoint().url() + ": token is not a string");
      out.push_back(TokenLogProb{token.get<std::string>(),
                                 finite_number(field(item, "logprob", poster_.endpoint()),
                                               poster_.endpoint())});
    }
    return out;
  }

 private:
  JsonPoster poster_;
};

class HttpScoringService final : public ScoringService {
 public:
  HttpScoringService(Endpoint e, RetryPolicy p) : poster_(std::move(e), p) {}

  std::vector<double> score(std::span<const ScoringPair> pairs) override {
    Json request{{"pairs", Json::array()}};
    for (const auto& p : pairs) {
      request["pairs"].push_back(Json{{"question", p.question},
                                      {"passage_title", p.passage_title},
                                      {"passage_text", p.passage_text}});
    }
    const Json response = poster_.post(request);
    const Json& scores = field(response, "scores", poster_.endpoint());
    if (!scores.is_array() || scores.size() != pairs.size()) {
      throw_service(poster_.endpoint().url() + ": expected " + std::to_string(pairs.size()) +
                    " scores");
    }
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& s : scores) out.push_back(finite_number(s, poster_.endpoint()));
    return out;
  }

 private:
  JsonPoster poster_;
};

}  // namespace

std::unique_ptr<EmbeddingService> make_http_embedding_service(const Endpoint& endpoint,
                                                              RetryPolicy policy) {
  return std::make_unique<HttpEmbeddingService>(endpoint, policy);
}

std::unique_ptr<LogProbService> make_http_logprob_service(const Endpoint& endpoint,
                                                          RetryPolicy policy) {
  return std::make_unique<HttpLogProbService>(endpoint, policy);
}

std::unique_ptr<ScoringService> make_http_scoring_service(const Endpoint& endpoint,
                                                          RetryPolicy policy) {
  return std::make_unique<HttpScoringService>(endpoint, policy);
}

}  // namespace lfqa
