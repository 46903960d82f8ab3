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

#include <ponzitrace/bytecode.hpp>

#include <array>
#include <cctype>

#include <ponzitrace/error.hpp>

namespace ponzitrace::bytecode {

namespace {

constexpr std::string_view kModule = "bytecode";

constexpr std::array<std::string_view, 32> kPushNames = {
    "PUSH1",  "PUSH2",  "PUSH3",  "PUSH4",  "PUSH5",  "PUSH6",  "PUSH7",  "PUSH8",
    "PUSH9",  "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
    "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
    "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
constexpr std::array<std::string_view, 16> kDupNames = {
    "DUP1", "DUP2",  "DUP3",  "DUP4",  "DUP5",  "DUP6",  "DUP7",  "DUP8",
    "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
constexpr std::array<std::string_view, 16> kSwapNames = {
    "SWAP1", "SWAP2",  "SWAP3",  "SWAP4",  "SWAP5",  "SWAP6",  "SWAP7",  "SWAP8",
    "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15", "SWAP16"};
constexpr std::array<std::string_view, 5> kLogNames = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};

constexpr OpcodeSpec simple(std::uint8_t b, std::string_view name, std::uint8_t pops,
                            std::uint8_t pushes) {
    return OpcodeSpec{b, name, pops, pushes, 0, false, false, false, true};
}

constexpr OpcodeSpec halting(std::uint8_t b, std::string_view name, std::uint8_t pops) {
    return OpcodeSpec{b, name, pops, 0, 0, true, false, false, true};
}

constexpr std::array<OpcodeSpec, 256> build_table() {
    std::array<OpcodeSpec, 256> t{};
    for (unsigned i = 0; i < 256; ++i) {
        t[i] = OpcodeSpec{static_cast<std::uint8_t>(i), "INVALID", 0, 0, 0, true, false, false, false};
    }
    auto set = [&t](const OpcodeSpec& s) { t[s.byte_value] = s; };

    set(halting(0x00, "STOP", 0));
    set(simple(0x01, "ADD", 2, 1));
    set(simple(0x02, "MUL", 2, 1));
    set(simple(0x03, "SUB", 2, 1));
    set(simple(0x04, "DIV", 2, 1));
    set(simple(0x05, "SDIV", 2, 1));
    set(simple(0x06, "MOD", 2, 1));
    set(simple(0x07, "SMOD", 2, 1));
    set(simple(0x08, "ADDMOD", 3, 1));
    set(simple(0x09, "MULMOD", 3, 1));
    set(simple(0x0a, "EXP", 2, 1));
    set(simple(0x0b, "SIGNEXTEND", 2, 1));

    set(simple(0x10, "LT", 2, 1));
    set(simple(0x11, "GT", 2, 1));
    set(simple(0x12, "SLT", 2, 1));
    set(simple(0x13, "SGT", 2, 1));
    set(simple(0x14, "EQ", 2, 1));
    set(simple(0x15, "ISZERO", 1, 1));
    set(simple(0x16, "AND", 2, 1));
    set(simple(0x17, "OR", 2, 1));
    set(simple(0x18, "XOR", 2, 1));
    set(simple(0x19, "NOT", 1, 1));
    set(simple(0x1a, "BYTE", 2, 1));
    set(simple(0x1b, "SHL", 2, 1));
    set(simple(0x1c, "SHR", 2, 1));
    set(simple(0x1d, "SAR", 2, 1));

    set(simple(0x20, "SHA3", 2, 1));

    set(simple(0x30, "ADDRESS", 0, 1));
    set(simple(0x31, "BALANCE", 1, 1));
    set(simple(0x32, "ORIGIN", 0, 1));
    set(simple(0x33, "CALLER", 0, 1));
    set(simple(0x34, "CALLVALUE", 0, 1));
    set(simple(0x35, "CALLDATALOAD", 1, 1));
    set(simple(0x36, "CALLDATASIZE", 0, 1));
    set(simple(0x37, "CALLDATACOPY", 3, 0));
    set(simple(0x38, "CODESIZE", 0, 1));
    set(simple(0x39, "CODECOPY", 3, 0));
    set(simple(0x3a, "GASPRICE", 0, 1));
    set(simple(0x3b, "EXTCODESIZE", 1, 1));
    set(simple(0x3c, "EXTCODECOPY", 4, 0));
    set(simple(0x3d, "RETURNDATASIZE", 0, 1));
    set(simple(0x3e, "RETURNDATACOPY", 3, 0));
    set(simple(0x3f, "EXTCODEHASH", 1, 1));

    set(simple(0x40, "BLOCKHASH", 1, 1));
    set(simple(0x41, "COINBASE", 0, 1));
    set(simple(0x42, "TIMESTAMP", 0, 1));
    set(simple(0x43, "NUMBER", 0, 1));
    set(simple(0x44, "DIFFICULTY", 0, 1));
    set(simple(0x45, "GASLIMIT", 0, 1));
    set(simple(0x46, "CHAINID", 0, 1));
    set(simple(0x47, "SELFBALANCE", 0, 1));
    set(simple(0x48, "BASEFEE", 0, 1));
    set(simple(0x49, "BLOBHASH", 1, 1));
    set(simple(0x4a, "BLOBBASEFEE", 0, 1));

    set(simple(0x50, "POP", 1, 0));
    set(simple(0x51, "MLOAD", 1, 1));
    set(simple(0x52, "MSTORE", 2, 0));
    set(simple(0x53, "MSTORE8", 2, 0));
    set(simple(0x54, "SLOAD", 1, 1));
    set(simple(0x55, "SSTORE", 2, 0));
    set(OpcodeSpec{0x56, "JUMP", 1, 0, 0, true, true, false, true});
    set(OpcodeSpec{0x57, "JUMPI", 2, 0, 0, false, false, true, true});
    set(simple(0x58, "PC", 0, 1));
    set(simple(0x59, "MSIZE", 0, 1));
    set(simple(0x5a, "GAS", 0, 1));
    set(simple(0x5b, "JUMPDEST", 0, 0));
    set(simple(0x5c, "TLOAD", 1, 1));
    set(simple(0x5d, "TSTORE", 2, 0));
    set(simple(0x5e, "MCOPY", 3, 0));
    set(simple(0x5f, "PUSH0", 0, 1));

    for (unsigned n = 1; n <= 32; ++n) {
        auto s = simple(static_cast<std::uint8_t>(0x5f + n), kPushNames[n - 1], 0, 1);
        s.immediate_len = static_cast<std::uint8_t>(n);
        set(s);
    }
    for (unsigned n = 1; n <= 16; ++n) {
        set(simple(static_cast<std::uint8_t>(0x7f + n), kDupNames[n - 1], static_cast<std::uint8_t>(n),
                   static_cast<std::uint8_t>(n + 1)));
        set(simple(static_cast<std::uint8_t>(0x8f + n), kSwapNames[n - 1],
                   static_cast<std::uint8_t>(n + 1), static_cast<std::uint8_t>(n + 1)));
    }
    for (unsigned n = 0; n <= 4; ++n) {
        set(simple(static_cast<std::uint8_t>(0xa0 + n), kLogNames[n], static_cast<std::uint8_t>(n + 2), 0));
    }

    set(simple(0xf0, "CREATE", 3, 1));
    set(simple(0xf1, "CALL", 7, 1));
    set(simple(0xf2, "CALLCODE", 7, 1));
    set(halting(0xf3, "RETURN", 2));
    set(simple(0xf4, "DELEGATECALL", 6, 1));
    set(simple(0xf5, "CREATE2", 4, 1));
    set(simple(0xfa, "STATICCALL", 6, 1));
    set(halting(0xfd, "REVERT", 2));
    set(OpcodeSpec{0xfe, "INVALID", 0, 0, 0, true, false, false, true});
    set(halting(0xff, "SELFDESTRUCT", 1));
    return t;
}

constexpr std::array<OpcodeSpec, 256> kTable = build_table();

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string_view to_string(Source source) noexcept {
    switch (source) {
        case Source::kFixture:
            return "fixture";
        case Source::kExplorer:
            return "explorer";
        case Source::kInline:
            return "inline";
    }
    return "inline";
}

const OpcodeSpec& opcode_spec(std::uint8_t byte_value) noexcept { return kTable[byte_value]; }

Bytecode parse_hex(std::string_view text, Source source) {
    std::size_t pos = 0;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos + 1 < text.size() && text[pos] == '0' && (text[pos + 1] == 'x' || text[pos + 1] == 'X')) {
        pos += 2;
    }

    std::vector<int> digits;
    digits.reserve(text.size() - pos);
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        const int v = hex_value(c);
        if (v < 0) {
            throw Error(ErrorCode::kNonHexCharacter, kModule,
                        "character '" + std::string(1, c) + "' at position " + std::to_string(pos));
        }
        digits.push_back(v);
    }
    if (digits.empty()) throw Error(ErrorCode::kEmpty, kModule, "no hex digits");
    if (digits.size() % 2 != 0) {
        throw Error(ErrorCode::kOddLength, kModule, std::to_string(digits.size()) + " hex digits");
    }

    Bytecode code;
    code.source = source;
    code.bytes.reserve(digits.size() / 2);
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        code.bytes.push_back(static_cast<std::uint8_t>((digits[i] << 4) | digits[i + 1]));
    }
    return code;
}

std::vector<Instruction> disassemble(const Bytecode& code) {
    if (code.bytes.empty()) throw Error(ErrorCode::kEmpty, kModule, "no code to disassemble");

    const auto& bytes = code.bytes;
    std::vector<Instruction> out;
    std::size_t pc = 0;
    while (pc < bytes.size()) {
        Instruction ins;
        ins.offset = pc;
        ins.opcode = bytes[pc];
        const std::size_t n = ins.spec().immediate_len;
        if (n > 0) {
            const std::size_t available = std::min(n, bytes.size() - pc - 1);
            std::array<std::uint8_t, 32> buf{};
            for (std::size_t i = 0; i < available; ++i) buf[i] = bytes[pc + 1 + i];
            ins.immediate = word_from_be(std::span<const std::uint8_t>(buf.data(), n));
            ins.immediate_bytes_present = static_cast<std::uint8_t>(available);
            ins.truncated = available < n;
        }
        out.push_back(ins);
        pc += 1 + n;
        if (ins.truncated) break;
    }
    return out;
}

std::vector<std::uint8_t> reencode(std::span<const Instruction> instructions) {
    std::vector<std::uint8_t> out;
    for (const auto& ins : instructions) {
        out.push_back(ins.opcode);
        if (ins.immediate) {
            const auto be = word_to_be(*ins.immediate);
            const std::size_t n = ins.spec().immediate_len;
            for (std::size_t i = 0; i < ins.immediate_bytes_present; ++i) out.push_back(be[32 - n + i]);
        }
    }
    return out;
}

std::string immediate_hex(const Instruction& instruction) {
    if (!instruction.immediate) return {};
    const auto be = word_to_be(*instruction.immediate);
    const std::size_t n = instruction.spec().immediate_len;
    return "0x" + bytes_to_hex(std::span<const std::uint8_t>(be.data() + 32 - n, n));
}

}  // namespace ponzitrace::bytecode
