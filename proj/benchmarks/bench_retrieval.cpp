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

#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "lfqa/corpus.hpp"
#include "lfqa/diagnostics.hpp"
#include "lfqa/retrieval.hpp"
#include "lfqa/textproc.hpp"

namespace {

lfqa::Corpus synthetic_corpus(std::size_t passages) {
  std::mt19937 rng(7);
  lfqa::Corpus corpus;
  for (std::size_t i = 0; i < passages; ++i) {
    std::string text;
    const std::size_t len = 40 + rng() % 80;
    for (std::size_t j = 0; j < len; ++j) text += "t" + std::to_string(rng() % 5000) + " ";
    corpus.add({"p" + std::to_string(i), "page" + std::to_string(i / 10), "Title", text});
  }
  return corpus;
}

void BM_IndexBuild(benchmark::State& state) {
  const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  const auto& sw = lfqa::StopwordList::builtin();
  for (auto _ : state) benchmark::DoNotOptimize(lfqa::InvertedIndex::build(corpus, sw, 0.9, 0.4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Retrieve(benchmark::State& state) {
  const auto corpus = synthetic_corpus(10000);
  const auto& sw = lfqa::StopwordList::builtin();
  const auto index = lfqa::InvertedIndex::build(corpus, sw, 0.9, 0.4);
  lfqa::Diagnostics diag(lfqa::LogLevel::quiet);
  const std::string query = "t12 t345 t678 t9 t1000 t2500 t4999";
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        index.retrieve("q", query, static_cast<std::size_t>(state.range(0)), sw, diag));
  }
}
BENCHMARK(BM_Retrieve)->Arg(100)->Arg(1000);

}  // namespace
