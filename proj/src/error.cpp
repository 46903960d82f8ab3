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

#include <ponzitrace/error.hpp>

namespace ponzitrace {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kEmpty:
            return "Empty";
        case ErrorCode::kOddLength:
            return "OddLength";
        case ErrorCode::kNonHexCharacter:
            return "NonHexCharacter";
        case ErrorCode::kDisconnectedSequence:
            return "DisconnectedSequence";
        case ErrorCode::kInvalidAddress:
            return "InvalidAddress";
        case ErrorCode::kEmptyCode:
            return "EmptyCode";
        case ErrorCode::kProviderError:
            return "ProviderError";
        case ErrorCode::kTimeout:
            return "Timeout";
        case ErrorCode::kNotFound:
            return "NotFound";
        case ErrorCode::kHashMismatch:
            return "HashMismatch";
        case ErrorCode::kParseError:
            return "ParseError";
        case ErrorCode::kInvalidConfig:
            return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string_view module, const std::string& detail)
    : std::runtime_error("[" + std::string{module} + "] " + std::string{to_string(code)} +
                         (detail.empty() ? "" : ": " + detail)),
      code_{code},
      module_{module} {}

}  // namespace ponzitrace
