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

#include "lfqa/diagnostics.hpp"

#include <algorithm>
#include <iostream>

#include "lfqa/error.hpp"

namespace lfqa {

LogLevel parse_log_level(std::string_view name) {
  if (name == "debug") return LogLevel::debug;
  if (name == "info") return LogLevel::info;
  if (name == "warn" || name == "warning") return LogLevel::warn;
  if (name == "error") return LogLevel::error;
  if (name == "quiet" || name == "off") return LogLevel::quiet;
  throw_invalid("unknown log level '" + std::string(name) + "'");
}

Diagnostics::Diagnostics(LogLevel echo_level) : Diagnostics(echo_level, std::clog) {}

Diagnostics::Diagnostics(LogLevel echo_level, std::ostream& sink)
    : echo_level_(echo_level), sink_(&sink) {}

void Diagnostics::debug(std::string_view message) { emit(LogLevel::debug, message); }
void Diagnostics::info(std::string_view message) { emit(LogLevel::info, message); }

void Diagnostics::warn(std::string_view message) {
  {
    std::lock_guard lock(mutex_);
    warnings_.emplace_back(message);
  }
  emit(LogLevel::warn, message);
}

std::vector<std::string> Diagnostics::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

std::size_t Diagnostics::warning_count() const {
  std::lock_guard lock(mutex_);
  return warnings_.size();
}

bool Diagnostics::has_warning_containing(std::string_view needle) const {
  std::lock_guard lock(mutex_);
  return std::any_of(warnings_.begin(), warnings_.end(), [&](const std::string& w) {
    return w.find(needle) != std::string::npos;
  });
}

Diagnostics& Diagnostics::quiet() {
  // Shared sink for callers that do not care about warnings. Recorded
  // warnings accumulate, so tests should use their own instance.
  static Diagnostics instance(LogLevel::quiet);
  return instance;
}

void Diagnostics::emit(LogLevel level, std::string_view message) {
  if (level < echo_level_ || echo_level_ == LogLevel::quiet) return;
  static constexpr const char* kPrefix[] = {"debug", "info", "warning", "error"};
  std::lock_guard lock(mutex_);
  *sink_ << "[" << kPrefix[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace lfqa
