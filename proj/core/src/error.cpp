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

#include "lfqa/error.hpp"

namespace lfqa {

void throw_invalid(const std::string& message) {
  throw Error(ErrorKind::invalid_input, message);
}

void throw_service(const std::string& message) {
  throw Error(ErrorKind::service, message);
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input:
      return 2;
    case ErrorKind::no_work:
      return 3;
    case ErrorKind::service:
      return 4;
  }
  return 1;
}

}  // namespace lfqa
