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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <ponzitrace/word.hpp>

namespace ponzitrace::bytecode {

enum class Source { kFixture, kExplorer, kInline };

std::string_view to_string(Source source) noexcept;

struct Bytecode {
    std::vector<std::uint8_t> bytes;
    Source source{Source::kInline};
};

/**
 * Static description of one EVM opcode.
 *
 * Unassigned byte values map to an INVALID entry, so the table is total over
 * 0x00..0xff.
 */
struct OpcodeSpec {
    std::uint8_t byte_value{0};
    std::string_view mnemonic;
    std::uint8_t pops{0};
    std::uint8_t pushes{0};
    //! N for PUSHN, 0 otherwise.
    std::uint8_t immediate_len{0};
    //! STOP, RETURN, REVERT, SELFDESTRUCT, INVALID and JUMP end a block with
    //! no fallthrough successor.
    bool is_terminator{false};
    bool is_jump{false};
    bool is_conditional_jump{false};
    //! False for bytes that have no assigned instruction.
    bool is_defined{true};
};

const OpcodeSpec& opcode_spec(std::uint8_t byte_value) noexcept;

namespace op {
inline constexpr std::uint8_t kStop = 0x00;
inline constexpr std::uint8_t kSha3 = 0x20;
inline constexpr std::uint8_t kCaller = 0x33;
inline constexpr std::uint8_t kCallValue = 0x34;
inline constexpr std::uint8_t kCallDataLoad = 0x35;
inline constexpr std::uint8_t kMload = 0x51;
inline constexpr std::uint8_t kMstore = 0x52;
inline constexpr std::uint8_t kMstore8 = 0x53;
inline constexpr std::uint8_t kSload = 0x54;
inline constexpr std::uint8_t kSstore = 0x55;
inline constexpr std::uint8_t kJump = 0x56;
inline constexpr std::uint8_t kJumpi = 0x57;
inline constexpr std::uint8_t kJumpdest = 0x5b;
inline constexpr std::uint8_t kPush0 = 0x5f;
inline constexpr std::uint8_t kPush1 = 0x60;
inline constexpr std::uint8_t kPush32 = 0x7f;
inline constexpr std::uint8_t kDup1 = 0x80;
inline constexpr std::uint8_t kDup16 = 0x8f;
inline constexpr std::uint8_t kSwap1 = 0x90;
inline constexpr std::uint8_t kSwap16 = 0x9f;
inline constexpr std::uint8_t kCall = 0xf1;
inline constexpr std::uint8_t kReturn = 0xf3;
inline constexpr std::uint8_t kRevert = 0xfd;
inline constexpr std::uint8_t kInvalid = 0xfe;
inline constexpr std::uint8_t kSelfDestruct = 0xff;
}  // namespace op

struct Instruction {
    std::size_t offset{0};
    std::uint8_t opcode{0};
    //! Present iff the opcode is PUSH1..PUSH32. Right-padded with zeros
    //! when truncated.
    std::optional<u256> immediate;
    //! The immediate ran past the end of the code. Only the final instruction
    //! can be truncated.
    bool truncated{false};
    //! Immediate bytes actually present in the code (< immediate_len when
    //! truncated).
    std::uint8_t immediate_bytes_present{0};

    [[nodiscard]] const OpcodeSpec& spec() const noexcept { return opcode_spec(opcode); }
    [[nodiscard]] std::string_view mnemonic() const noexcept { return spec().mnemonic; }
    [[nodiscard]] std::size_t size() const noexcept { return 1 + immediate_bytes_present; }
};

/**
 * Parses contract code from hex text.
 *
 * Accepts an optional "0x"/"0X" prefix, either case, and ignores whitespace
 * anywhere in the text. Throws Error with kEmpty, kOddLength or
 * kNonHexCharacter (the message carries the character position).
 */
Bytecode parse_hex(std::string_view text, Source source = Source::kInline);

//! Linear-sweep disassembly from offset 0. Never fails on non-empty input.
std::vector<Instruction> disassemble(const Bytecode& code);

//! Inverse of disassemble: opcode bytes plus the immediate bytes present.
std::vector<std::uint8_t> reencode(std::span<const Instruction> instructions);

//! Immediate rendered as 0x-prefixed hex padded to the PUSH width, or empty.
std::string immediate_hex(const Instruction& instruction);

}  // namespace ponzitrace::bytecode
