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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "lfqa/diagnostics.hpp"
#include "lfqa/retrieval.hpp"
#include "lfqa/services.hpp"
#include "lfqa/silver.hpp"

namespace lfqa {

std::string_view library_version();

/// File locations. Relative paths in a config file are resolved against the
/// directory that holds it; empty means "not configured".
struct PathsConfig {
  std::filesystem::path corpus;
  std::filesystem::path dataset;
  std::filesystem::path output_dir;
  std::filesystem::path index;             // default: <output_dir>/index.bin
  std::filesystem::path stopwords;         // default: built-in English list
  std::filesystem::path ingest_run;        // external first-stage run
  std::filesystem::path answers;           // generated answers to evaluate
  std::filesystem::path extractions;       // D-F1 extractions
  std::filesystem::path conv_extractions;  // C-F1 extractions
  std::filesystem::path eval_run;          // default: rerank or pools output
};

struct MineConfig {
  SilverConfig silver;
  SelectionMode mode = SelectionMode::silver;
  bool context_resample = false;
  std::string prompt_template{kDefaultPerplexityTemplate};
};

struct ServicesConfig {
  std::string embedding_url;
  std::string logprob_url;
  std::string scorer_url;
  std::size_t batch_size = 16;
  RetryPolicy retry;
  bool cosine = false;
};

struct RerankConfig {
  bool enabled = true;
  std::string scorer = "passthrough";  // passthrough | lexical | service
  std::size_t k = 5;
};

struct EvalConfig {
  std::size_t k = 5;
  bool micro = false;
};

struct PipelineConfig {
  PathsConfig paths;
  RetrievalConfig retrieval;
  std::optional<bool> builtin_retrieval;  // unset: builtin unless a run is ingested
  MineConfig mine;
  ServicesConfig services;
  RerankConfig rerank;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  LogLevel log_level = LogLevel::warn;

  /// Parses the JSON config format. Unknown keys are rejected.
  static PipelineConfig parse(std::string_view json, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  /// LFQA_EMBEDDING_URL, LFQA_LOGPROB_URL and LFQA_SCORER_URL replace the
  /// configured endpoints when set and non-empty.
  void apply_environment();

  /// Range checks; throws invalid_input. File existence is checked by the
  /// commands that read each file.
  void validate() const;

  /// Throws invalid_input "ambiguous pool source" when builtin retrieval is
  /// requested together with an ingested run.
  PoolSource pool_source() const;

  std::filesystem::path output(std::string_view name) const;
  std::filesystem::path index_path() const;
};

/// Commands return a process exit code (0 on success) and report failures
/// by throwing lfqa::Error; see run_guarded.
int cmd_index(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);
int cmd_retrieve(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);
int cmd_mine(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);
int cmd_rerank(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);
int cmd_eval(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);

/// index, retrieve, mine, rerank (when enabled) and eval. Each finished
/// stage is recorded in <output_dir>/manifest.json with a fingerprint of its
/// inputs and the SHA-256 of its outputs; a later run skips stages whose
/// record still matches.
int cmd_pipeline(const PipelineConfig& config, std::ostream& out, Diagnostics& diag);

/// Calls `command`, mapping lfqa::Error to its exit code and any other
/// exception to 1. The message goes to `err`.
template <typename Fn>
int run_guarded(Fn&& command, std::ostream& err);

int report_failure(const std::exception& e, std::ostream& err);

template <typename Fn>
int run_guarded(Fn&& command, std::ostream& err) {
  try {
    return command();
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

}  // namespace lfqa
