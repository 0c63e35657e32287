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

// Line-delimited JSON helpers shared by the readers and writers. Private to
// the core library.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lfqa::jsonl {

using Json = nlohmann::json;

/// Calls `fn(record, line_number)` for each non-blank line. Lines are
/// numbered from 1. Parse failures raise invalid_input naming the line.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn);

/// Compact JSON with sorted keys and shortest round-trip number formatting
/// (same layout as Python's `json.dumps(sort_keys=True,
/// separators=(",", ":"), ensure_ascii=False)`), so outputs are byte-stable
/// and comparable against independent tooling.
std::string canonical_dump(const Json& value);

/// Canonical textual form of a finite double, e.g. "0.6", "1.0", "1e-05".
std::string format_double(double value);

/// Typed field access that reports the file position on failure.
class RecordReader {
 public:
  RecordReader(const Json& record, std::string_view file, std::size_t line);

  std::string required_string(const char* key, bool allow_empty = false) const;
  std::optional<std::string> optional_string(const char* key) const;
  std::vector<std::string> string_list(const char* key) const;
  long long required_int(const char* key) const;
  double required_number(const char* key) const;
  const Json& required(const char* key) const;
  bool has(const char* key) const;

  [[noreturn]] void fail(const std::string& message) const;
  std::string where() const;

 private:
  const Json& record_;
  std::string_view file_;
  std::size_t line_;
};

}  // namespace lfqa::jsonl
