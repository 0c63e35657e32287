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

#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "lfqa/corpus.hpp"
#include "lfqa/pipeline.hpp"
#include "lfqa/retrieval.hpp"

namespace lfqa::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture_dir();
std::filesystem::path stopwords_file();
std::filesystem::path cli_path();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

Corpus make_corpus(std::initializer_list<Passage> passages);

/// Pool in the given order; scores default to a descending sequence.
CandidatePool make_pool(const std::string& question_id, const std::vector<std::string>& ids);
CandidatePool make_scored_pool(const std::string& question_id,
                               const std::vector<std::pair<std::string, double>>& entries);

/// The toy fixture config with outputs redirected to `output_dir`.
PipelineConfig toy_config(const std::filesystem::path& output_dir);

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the lfqa executable with the given arguments.
CliResult run_cli(const std::vector<std::string>& args,
                  const std::vector<std::pair<std::string, std::string>>& env = {});

}  // namespace lfqa::testing
