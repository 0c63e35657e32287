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
#include <vector>

#include "lfqa/textproc.hpp"

namespace {

std::vector<std::string> random_words(std::size_t n, std::size_t vocab, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng() % vocab));
  return out;
}

void BM_Tokenize(benchmark::State& state) {
  std::string text;
  for (const auto& w : random_words(static_cast<std::size_t>(state.range(0)), 500, 1)) {
    text += w + ", ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(lfqa::tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(64)->Arg(1024);

void BM_RougeL(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_words(n, 50, 2);
  const auto b = random_words(n, 50, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lfqa::rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(8)->Arg(64)->Arg(256);

void BM_ContainsAnswer(benchmark::State& state) {
  const auto passage = random_words(static_cast<std::size_t>(state.range(0)), 200, 4);
  const std::vector<std::string> answer{passage[passage.size() / 2], passage[passage.size() / 2 + 1]};
  for (auto _ : state) benchmark::DoNotOptimize(lfqa::contains_answer(passage, answer));
}
BENCHMARK(BM_ContainsAnswer)->Arg(128)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
