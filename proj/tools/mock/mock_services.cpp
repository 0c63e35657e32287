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

#include "mock_services.hpp"

#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "lfqa/hashing.hpp"

namespace lfqa::mock {

using Json = nlohmann::json;

namespace {

double unit_from(std::string_view material) {
  return static_cast<double>(sha256_u64(material) >> 11) * 0x1.0p-53;
}

}  // namespace

MockOptions MockOptions::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path.string());
  const Json j = Json::parse(in);
  MockOptions options;
  if (j.contains("dimension")) options.dimension = j["dimension"].get<std::size_t>();
  if (j.contains("embeddings")) {
    for (const auto& [text, vec] : j["embeddings"].items()) {
      options.embeddings[text] = vec.get<std::vector<double>>();
    }
  }
  auto read_tokens = [](const Json& tokens) {
    std::vector<TokenLogProb> out;
    for (const auto& t : tokens) {
      out.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
    }
    return out;
  };
  if (j.contains("logprobs")) {
    for (const auto& [continuation, tokens] : j["logprobs"].items()) {
      options.logprobs[continuation] = read_tokens(tokens);
    }
  }
  if (j.contains("logprobs_by_marker")) {
    for (const auto& entry : j["logprobs_by_marker"]) {
      options.logprobs_by_marker.emplace_back(entry.at("marker").get<std::string>(),
                                              read_tokens(entry.at("tokens")));
    }
  }
  if (j.contains("scores")) {
    for (const auto& [text, score] : j["scores"].items()) options.scores[text] = score.get<double>();
  }
  return options;
}

std::vector<std::string> split_keep_spaces(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    current.push_back(text[i]);
    const bool next_word = i + 1 < text.size() &&
                           std::isspace(static_cast<unsigned char>(text[i + 1])) == 0;
    if (space && next_word) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> hash_embedding(const std::string& text, std::size_t dimension) {
  std::vector<double> v(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    v[i] = unit_from(text + "\x1f" + std::to_string(i)) - 0.5;
  }
  return v;
}

double hash_logprob(const std::string& prompt, const std::string& token) {
  return -0.01 - 4.0 * unit_from(prompt + "\x1f" + token);
}

double hash_score(const std::string& question, const std::string& passage_text) {
  return unit_from(question + "\x1f" + passage_text);
}

struct MockServer::Impl {
  MockOptions options;
  httplib::Server server;
  std::mutex mutex;
  std::size_t vectors_served = 0;
};

MockServer::MockServer(MockOptions options, int port) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& server = impl_->server;
  Impl* impl = impl_.get();

  auto guard = [this, impl](auto handler) {
    return [this, impl, handler](const httplib::Request& req, httplib::Response& res) {
      const std::size_t n = ++requests_;
      if (impl->options.always_fail ||
          n <= static_cast<std::size_t>(std::max(0, impl->options.fail_first))) {
        res.status = 503;
        res.set_content("{\"error\":\"unavailable\"}", "application/json");
        return;
      }
      Json body;
      try {
        body = Json::parse(req.body);
        res.set_content(handler(body).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  };

  server.Post("/embed", guard([impl](const Json& body) {
    Json vectors = Json::array();
    for (const auto& t : body.at("texts")) {
      const auto text = t.get<std::string>();
      auto it = impl->options.embeddings.find(text);
      auto v = it != impl->options.embeddings.end() ? it->second
                                                    : hash_embedding(text, impl->options.dimension);
      if (impl->options.wrong_dimension_every > 0) {
        std::lock_guard lock(impl->mutex);
        if (++impl->vectors_served % impl->options.wrong_dimension_every == 0) v.push_back(0.0);
      }
      vectors.push_back(v);
    }
    return Json{{"vectors", vectors}};
  }));

  server.Post("/logprobs", guard([impl](const Json& body) {
    const auto prompt = body.at("prompt").get<std::string>();
    const auto continuation = body.at("continuation").get<std::string>();
    Json tokens = Json::array();
    const std::vector<TokenLogProb>* canned = nullptr;
    std::size_t latest = 0;
    for (const auto& [marker, entry] : impl->options.logprobs_by_marker) {
      const auto pos = prompt.rfind(marker);
      if (pos != std::string::npos && (canned == nullptr || pos >= latest)) {
        canned = &entry;
        latest = pos;
      }
    }
    if (canned == nullptr) {
      if (auto it = impl->options.logprobs.find(continuation); it != impl->options.logprobs.end()) {
        canned = &it->second;
      }
    }
    if (canned != nullptr) {
      for (const auto& t : *canned) tokens.push_back({{"token", t.token}, {"logprob", t.logprob}});
    } else {
      for (const auto& piece : split_keep_spaces(continuation)) {
        tokens.push_back({{"token", piece}, {"logprob", hash_logprob(prompt, piece)}});
      }
    }
    if (impl->options.mismatched_tokens && !tokens.empty()) {
      tokens.back()["token"] = tokens.back()["token"].get<std::string>() + "#";
    }
    return Json{{"token_logprobs", tokens}};
  }));

  server.Post("/score", guard([impl](const Json& body) {
    Json scores = Json::array();
    for (const auto& pair : body.at("pairs")) {
      const auto question = pair.at("question").get<std::string>();
      const auto text = pair.at("passage_text").get<std::string>();
      auto it = impl->options.scores.find(text);
      scores.push_back(it != impl->options.scores.end() ? it->second : hash_score(question, text));
    }
    return Json{{"scores", scores}};
  }));

  if (port == 0) {
    port_ = server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("mock server could not bind a port");
  thread_ = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
}

MockServer::~MockServer() {
  stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url(const std::string& path) const {
  return "http://127.0.0.1:" + std::to_string(port_) + path;
}

void MockServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void MockServer::stop() { impl_->server.stop(); }

}  // namespace lfqa::mock
