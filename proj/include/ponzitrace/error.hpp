/*
   Copyright 2026 The ponzitrace Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ponzitrace {

enum class ErrorCode {
    // bytecode
    kEmpty,
    kOddLength,
    kNonHexCharacter,
    // symexec
    kDisconnectedSequence,
    // ingest
    kInvalidAddress,
    kEmptyCode,
    kProviderError,
    kTimeout,
    kNotFound,
    kHashMismatch,
    kParseError,
    // cli
    kInvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

//! Error raised by any pipeline stage. The message is prefixed with the
//! originating module, e.g. "[bytecode] OddLength: 3 hex digits".
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string_view module, const std::string& detail);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& module() const noexcept { return module_; }

  private:
    ErrorCode code_;
    std::string module_;
};

}  // namespace ponzitrace
