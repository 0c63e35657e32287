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

#include <stdexcept>
#include <string>

namespace lfqa {

/// Failure categories. Each maps onto one stable CLI exit code.
enum class ErrorKind {
  invalid_input,  // bad config, malformed file, violated precondition (exit 2)
  no_work,        // nothing left to do after filtering (exit 3)
  service,        // external service unreachable or misbehaving (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_invalid(const std::string& message);
[[noreturn]] void throw_service(const std::string& message);

int exit_code(ErrorKind kind) noexcept;

}  // namespace lfqa
