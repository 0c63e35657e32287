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

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lfqa/error.hpp"
#include "lfqa/matchers.hpp"
#include "lfqa/pipeline.hpp"
#include "lfqa/silver.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> k;
  std::optional<std::size_t> silver_k;
  std::optional<std::size_t> pool_size;
  std::optional<std::string> strategy;
  std::optional<std::string> mode;
  std::optional<std::string> scorer;
  std::optional<std::string> output_dir;
  std::optional<std::string> run;
  std::optional<std::string> answers;
  std::optional<std::string> log_level;
  bool micro = false;
};

void apply(const Overrides& o, lfqa::PipelineConfig& cfg) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.k) {
    cfg.eval.k = *o.k;
    cfg.rerank.k = *o.k;
  }
  if (o.silver_k) cfg.mine.silver.k = *o.silver_k;
  if (o.pool_size) cfg.retrieval.pool_size = *o.pool_size;
  if (o.strategy) cfg.mine.silver.strategy = lfqa::parse_strategy(*o.strategy);
  if (o.mode) cfg.mine.mode = lfqa::parse_selection_mode(*o.mode);
  if (o.scorer) {
    cfg.rerank.scorer = *o.scorer;
    cfg.rerank.enabled = true;
  }
  if (o.output_dir) cfg.paths.output_dir = *o.output_dir;
  if (o.run) cfg.paths.eval_run = *o.run;
  if (o.answers) cfg.paths.answers = *o.answers;
  if (o.log_level) cfg.log_level = lfqa::parse_log_level(*o.log_level);
  if (o.micro) cfg.eval.micro = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised passage mining, re-ranking and evaluation for long-form QA"};
  app.set_version_flag("--version", std::string(lfqa::library_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("-c,--config", o.config, "Pipeline config (JSON)")->required();
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("-j,--jobs", o.jobs, "Worker threads");
  app.add_option("--k", o.k, "Evaluation and re-ranking depth");
  app.add_option("--silver-k", o.silver_k, "Silver positives per question");
  app.add_option("--pool-size", o.pool_size, "Candidate pool size");
  app.add_option("--strategy", o.strategy,
                 "Matcher: lexical_recall, jaccard, rouge_l, semantic, perplexity");
  app.add_option("--mode", o.mode, "Selection: silver, da_only, lfa_only");
  app.add_option("--scorer", o.scorer, "Re-ranker: passthrough, lexical, service");
  app.add_option("-o,--output-dir", o.output_dir, "Directory for outputs");
  app.add_option("--run", o.run, "Run file to evaluate");
  app.add_option("--answers", o.answers, "Generated answers to evaluate");
  app.add_option("--log-level", o.log_level, "debug, info, warn, error or quiet");
  app.add_flag("--micro", o.micro, "Also report micro-averaged recalls");

  using Command = int (*)(const lfqa::PipelineConfig&, std::ostream&, lfqa::Diagnostics&);
  const std::map<std::string, std::pair<Command, const char*>> commands = {
      {"index", {&lfqa::cmd_index, "Build and persist the BM25 index"}},
      {"retrieve", {&lfqa::cmd_retrieve, "Write first-stage candidate pools"}},
      {"mine", {&lfqa::cmd_mine, "Select silver passages and emit training pairs"}},
      {"rerank", {&lfqa::cmd_rerank, "Re-rank candidate pools"}},
      {"eval", {&lfqa::cmd_eval, "Compute retrieval and generation metrics"}},
      {"pipeline", {&lfqa::cmd_pipeline, "Run every stage with a resumable manifest"}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lfqa::exit_code(lfqa::ErrorKind::invalid_input);
  }

  Command command = nullptr;
  for (const auto& [name, entry] : commands) {
    if (app.got_subcommand(name)) command = entry.first;
  }

  return lfqa::run_guarded(
      [&] {
        auto cfg = lfqa::PipelineConfig::load(o.config);
        cfg.apply_environment();
        apply(o, cfg);
        lfqa::Diagnostics diag(cfg.log_level, std::cerr);
        return command(cfg, std::cout, diag);
      },
      std::cerr);
}
