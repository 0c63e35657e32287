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

#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

enum class LogLevel { debug, info, warn, error, quiet };

LogLevel parse_log_level(std::string_view name);

/// Collects warnings raised while loading or processing data. Warnings are
/// part of several operation contracts ("empty pool, warning"), so they are
/// recorded for inspection as well as echoed to a stream. Thread-safe.
class Diagnostics {
 public:
  explicit Diagnostics(LogLevel echo_level = LogLevel::warn);
  Diagnostics(LogLevel echo_level, std::ostream& sink);

  void debug(std::string_view message);
  void info(std::string_view message);
  void warn(std::string_view message);

  std::vector<std::string> warnings() const;
  std::size_t warning_count() const;
  bool has_warning_containing(std::string_view needle) const;

  static Diagnostics& quiet();

 private:
  void emit(LogLevel level, std::string_view message);

  LogLevel echo_level_;
  std::ostream* sink_;
  mutable std::mutex mutex_;
  std::vector<std::string> warnings_;
};

}  // namespace lfqa
