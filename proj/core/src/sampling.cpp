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

#include "lfqa/sampling.hpp"

#include <algorithm>
#include <utility>

#include "lfqa/hashing.hpp"

namespace lfqa {

std::uint64_t sampling_key(std::uint64_t seed, std::string_view question_id,
                           std::string_view item_id) {
  std::string material = std::to_string(seed);
  material.push_back('\x1f');
  material.append(question_id);
  material.push_back('\x1f');
  material.append(item_id);
  return sha256_u64(material);
}

std::vector<std::string> sample_without_replacement(std::span<const std::string> ids,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::string_view question_id,
                                                    std::string_view salt) {
  std::string scope(question_id);
  if (!salt.empty()) {
    scope.push_back('\x1f');
    scope.append(salt);
  }
  std::vector<std::pair<std::uint64_t, const std::string*>> keyed;
  keyed.reserve(ids.size());
  for (const auto& id : ids) keyed.emplace_back(sampling_key(seed, scope, id), &id);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : *a.second < *b.second;
  });
  std::vector<std::string> out;
  const std::size_t n = std::min(count, keyed.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*keyed[i].second);
  return out;
}

}  // namespace lfqa
