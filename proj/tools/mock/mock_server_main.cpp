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

// Standalone mock model services for local experiments and scripted tests.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "mock_services.hpp"

namespace {
lfqa::mock::MockServer* g_server = nullptr;
void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock embedding, log-prob and scoring services"};
  int port = 0;
  std::string fixture;
  lfqa::mock::MockOptions options;
  app.add_option("--port", port, "Port on 127.0.0.1 (0 picks a free port)");
  app.add_option("--fixture", fixture, "JSON file with canned responses")->check(CLI::ExistingFile);
  app.add_option("--dimension", options.dimension, "Embedding dimension for unknown texts");
  app.add_option("--fail-first", options.fail_first, "Answer the first N requests with 503");
  app.add_flag("--always-fail", options.always_fail, "Answer every request with 503");
  app.add_flag("--mismatched-tokens", options.mismatched_tokens,
               "Return log-prob tokens that do not spell the continuation");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!fixture.empty()) {
      auto loaded = lfqa::mock::MockOptions::load(fixture);
      loaded.fail_first = options.fail_first;
      loaded.always_fail = options.always_fail;
      loaded.mismatched_tokens = options.mismatched_tokens;
      if (app.count("--dimension") > 0) loaded.dimension = options.dimension;
      options = std::move(loaded);
    }
    lfqa::mock::MockServer server(options, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://127.0.0.1:" << server.port() << std::endl;
    server.wait();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
