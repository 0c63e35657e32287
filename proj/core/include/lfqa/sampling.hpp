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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

/// Seeded sampling key for one item in one question's candidate pool.
/// Sorting items by key gives a uniformly random permutation that depends
/// only on (seed, question, item), so adding questions or reordering input
/// never perturbs an existing sample.
std::uint64_t sampling_key(std::uint64_t seed, std::string_view question_id,
                           std::string_view item_id);

/// Uniform sample without replacement of up to `count` ids, in key order.
/// `salt` distinguishes independent draws for the same question.
std::vector<std::string> sample_without_replacement(std::span<const std::string> ids,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::string_view question_id,
                                                    std::string_view salt = {});

}  // namespace lfqa
