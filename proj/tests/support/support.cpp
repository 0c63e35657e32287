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

#include "support.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lfqa::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return LFQA_SOURCE_DIR; }
fs::path fixture_dir() { return LFQA_FIXTURE_DIR; }
fs::path stopwords_file() { return LFQA_STOPWORDS_FILE; }
fs::path cli_path() { return LFQA_CLI_PATH; }

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "lfqa-test-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Corpus make_corpus(std::initializer_list<Passage> passages) {
  Corpus corpus;
  for (const auto& p : passages) corpus.add(p);
  return corpus;
}

CandidatePool make_pool(const std::string& question_id, const std::vector<std::string>& ids) {
  CandidatePool pool{question_id, {}, PoolSource::builtin_bm25};
  double score = static_cast<double>(ids.size());
  for (const auto& id : ids) pool.entries.push_back({id, score--});
  return pool;
}

CandidatePool make_scored_pool(const std::string& question_id,
                               const std::vector<std::pair<std::string, double>>& entries) {
  CandidatePool pool{question_id, {}, PoolSource::builtin_bm25};
  for (const auto& [id, score] : entries) pool.entries.push_back({id, score});
  return pool;
}

PipelineConfig toy_config(const fs::path& output_dir) {
  auto cfg = PipelineConfig::load(fixture_dir() / "config.json");
  cfg.paths.output_dir = output_dir;
  cfg.log_level = LogLevel::quiet;
  return cfg;
}

namespace {
std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}
}  // namespace

CliResult run_cli(const std::vector<std::string>& args,
                  const std::vector<std::pair<std::string, std::string>>& env) {
  TempDir capture;
  std::string command;
  for (const auto& [name, value] : env) command += name + "=" + quote(value) + " ";
  command += quote(cli_path().string());
  for (const auto& a : args) command += " " + quote(a);
  command += " >" + quote((capture / "out").string()) + " 2>" + quote((capture / "err").string());
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(capture / "out");
  result.err = read_file(capture / "err");
  return result;
}

}  // namespace lfqa::testing
