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

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <ponzitrace/bytecode.hpp>
#include <ponzitrace/error.hpp>

#include "support.hpp"

namespace ponzitrace::bytecode {
namespace {

ErrorCode parse_error(std::string_view text) {
    try {
        (void)parse_hex(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for '" << text << "'";
    return ErrorCode::kInvalidConfig;
}

TEST(ParseHex, PairsDigits) {
    EXPECT_EQ(parse_hex("0x6001").bytes, (std::vector<std::uint8_t>{0x60, 0x01}));
    EXPECT_EQ(parse_hex("00").bytes, (std::vector<std::uint8_t>{0x00}));
    EXPECT_EQ(parse_hex("  0XaB cd\n\tEf ").bytes, (std::vector<std::uint8_t>{0xab, 0xcd, 0xef}));
}

TEST(ParseHex, Errors) {
    EXPECT_EQ(parse_error("0x123"), ErrorCode::kOddLength);
    EXPECT_EQ(parse_error(""), ErrorCode::kEmpty);
    EXPECT_EQ(parse_error("0x"), ErrorCode::kEmpty);
    EXPECT_EQ(parse_error("  \n "), ErrorCode::kEmpty);
    EXPECT_EQ(parse_error("60zz"), ErrorCode::kNonHexCharacter);
}

TEST(ParseHex, NonHexPositionIsReported) {
    try {
        (void)parse_hex("6001g0");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string{e.what()}.find('4'), std::string::npos) << e.what();
        EXPECT_EQ(e.module(), "bytecode");
    }
}

TEST(OpcodeSpec, CriticalInstructions) {
    const auto& caller = opcode_spec(0x33);
    EXPECT_EQ(caller.mnemonic, "CALLER");
    EXPECT_EQ(caller.pops, 0);
    EXPECT_EQ(caller.pushes, 1);
    const auto& sstore = opcode_spec(0x55);
    EXPECT_EQ(sstore.mnemonic, "SSTORE");
    EXPECT_EQ(sstore.pops, 2);
    EXPECT_EQ(sstore.pushes, 0);
    const auto& sload = opcode_spec(0x54);
    EXPECT_EQ(sload.pops, 1);
    EXPECT_EQ(sload.pushes, 1);
    const auto& call = opcode_spec(0xf1);
    EXPECT_EQ(call.mnemonic, "CALL");
    EXPECT_EQ(call.pops, 7);
    EXPECT_EQ(call.pushes, 1);
}

TEST(OpcodeSpec, TableInvariants) {
    for (int b = 0; b < 256; ++b) {
        const auto& s = opcode_spec(static_cast<std::uint8_t>(b));
        EXPECT_EQ(s.byte_value, b);
        const bool push = b >= 0x60 && b <= 0x7f;
        EXPECT_EQ(s.immediate_len, push ? b - 0x5f : 0) << b;
        EXPECT_FALSE(s.is_jump && s.is_conditional_jump) << b;
        if (!s.is_defined) {
            EXPECT_EQ(s.mnemonic, "INVALID");
            EXPECT_EQ(s.pops, 0);
            EXPECT_EQ(s.pushes, 0);
            EXPECT_TRUE(s.is_terminator);
        }
    }
    for (std::uint8_t t : {0x00, 0x56, 0xf3, 0xfd, 0xfe, 0xff}) EXPECT_TRUE(opcode_spec(t).is_terminator) << int{t};
    EXPECT_FALSE(opcode_spec(0x57).is_terminator);
    EXPECT_TRUE(opcode_spec(0x57).is_conditional_jump);
    EXPECT_TRUE(opcode_spec(0x56).is_jump);
}

// Opcodes added after the reference table's fork.
const std::set<int> kNewerOpcodes{0x48, 0x49, 0x4a, 0x5c, 0x5d, 0x5e, 0x5f};

// Rows where the reference table itself is wrong: it names 0x58 GETPC and
// gives CREATE2 three inputs (EIP-1014 has value, offset, size, salt).
struct Erratum {
    std::string_view name;
    int pops;
};
const std::map<int, Erratum> kReferenceErrata{{0x58, {"PC", 0}}, {0xf5, {"CREATE2", 4}}};

TEST(OpcodeSpec, MatchesReferenceTable) {
    const auto rows = test::read_lines(test::kDataDir / "opcodes.ref.txt");
    ASSERT_GT(rows.size(), 140u);
    std::set<int> seen;
    for (const auto& row : rows) {
        std::istringstream in{row};
        std::string byte_hex, name;
        int pops = 0, pushes = 0, imm = 0;
        in >> byte_hex >> name >> pops >> pushes >> imm;
        const int b = std::stoi(byte_hex, nullptr, 16);
        seen.insert(b);
        const auto& s = opcode_spec(static_cast<std::uint8_t>(b));
        if (auto e = kReferenceErrata.find(b); e != kReferenceErrata.end()) {
            name = std::string{e->second.name};
            pops = e->second.pops;
        }
        EXPECT_EQ(s.mnemonic, name) << byte_hex;
        EXPECT_EQ(s.pops, pops) << name;
        EXPECT_EQ(s.pushes, pushes) << name;
        EXPECT_EQ(s.immediate_len, imm) << name;
    }
    for (int b = 0; b < 256; ++b) {
        if (seen.count(b)) continue;
        const auto& s = opcode_spec(static_cast<std::uint8_t>(b));
        EXPECT_EQ(s.is_defined, kNewerOpcodes.count(b) > 0) << std::hex << b << " " << s.mnemonic;
    }
}

TEST(Disassemble, PushAdd) {
    const auto ins = disassemble(parse_hex("6001600201"));
    ASSERT_EQ(ins.size(), 3u);
    EXPECT_EQ(ins[0].offset, 0u);
    EXPECT_EQ(ins[0].mnemonic(), "PUSH1");
    EXPECT_EQ(*ins[0].immediate, u256{1});
    EXPECT_EQ(ins[1].offset, 2u);
    EXPECT_EQ(*ins[1].immediate, u256{2});
    EXPECT_EQ(ins[2].offset, 4u);
    EXPECT_EQ(ins[2].mnemonic(), "ADD");
    EXPECT_FALSE(ins[2].immediate);
}

TEST(Disassemble, TruncatedPushIsPaddedAndFlagged) {
    const auto ins = disassemble(parse_hex("61FF"));
    ASSERT_EQ(ins.size(), 1u);
    EXPECT_EQ(ins[0].mnemonic(), "PUSH2");
    EXPECT_TRUE(ins[0].truncated);
    EXPECT_EQ(*ins[0].immediate, u256{0xff00});
    EXPECT_EQ(ins[0].immediate_bytes_present, 1);
    EXPECT_EQ(immediate_hex(ins[0]), "0xff00");
    EXPECT_EQ(reencode(ins), parse_hex("61ff").bytes);
}

TEST(Disassemble, UnknownBytesBecomeInvalid) {
    const auto ins = disassemble(parse_hex("0c21ef"));
    ASSERT_EQ(ins.size(), 3u);
    for (const auto& i : ins) {
        EXPECT_EQ(i.mnemonic(), "INVALID");
        EXPECT_TRUE(i.spec().is_terminator);
    }
    EXPECT_EQ(ins[1].opcode, 0x21);
}

TEST(Disassemble, PushDataIsNotDecoded) {
    const auto ins = disassemble(parse_hex("625b5b5b00"));
    ASSERT_EQ(ins.size(), 2u);
    EXPECT_EQ(immediate_hex(ins[0]), "0x5b5b5b");
    EXPECT_EQ(ins[1].offset, 4u);
}

TEST(Disassemble, RandomRoundTripAndContiguity) {
    std::mt19937 rng{7};
    for (int round = 0; round < 300; ++round) {
        std::vector<std::uint8_t> bytes(1 + rng() % 300);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        const auto ins = disassemble(Bytecode{bytes});
        ASSERT_FALSE(ins.empty());
        EXPECT_EQ(ins.front().offset, 0u);
        for (std::size_t i = 0; i + 1 < ins.size(); ++i) {
            EXPECT_EQ(ins[i + 1].offset, ins[i].offset + 1 + ins[i].spec().immediate_len);
            EXPECT_FALSE(ins[i].truncated);
        }
        EXPECT_EQ(ins.back().offset + ins.back().size(), bytes.size());
        EXPECT_EQ(reencode(ins), bytes);
    }
}

struct RefLine {
    std::size_t offset;
    std::string mnemonic;
    std::string immediate;
};

std::vector<RefLine> reference_listing(const std::string& name) {
    std::vector<RefLine> out;
    for (const auto& line : test::read_lines(test::kDataDir / (name + ".ref.txt"))) {
        std::istringstream in{line};
        RefLine r;
        in >> r.offset >> r.mnemonic;
        in >> r.immediate;
        out.push_back(r);
    }
    return out;
}

class FixtureListing : public ::testing::TestWithParam<std::string> {};

TEST_P(FixtureListing, MatchesReferenceDisassembler) {
    const auto code = test::fixture_code(GetParam());
    const auto ours = disassemble(code);
    const auto ref = reference_listing(GetParam());
    // The reference drops a trailing truncated PUSH; everything else must agree.
    std::size_t n = ours.size();
    if (!ours.empty() && ours.back().truncated) --n;
    ASSERT_EQ(ref.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = ours[i];
        const auto& r = ref[i];
        ASSERT_EQ(a.offset, r.offset) << i;
        if (kNewerOpcodes.count(a.opcode)) {
            EXPECT_EQ(r.mnemonic, "INVALID") << a.offset;
        } else {
            EXPECT_EQ(a.mnemonic(), r.mnemonic) << a.offset;
        }
        const std::string imm = a.immediate ? immediate_hex(a).substr(2) : "";
        EXPECT_EQ(imm, r.immediate) << a.offset;
    }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, FixtureListing,
                         ::testing::Values("scenario1", "scenario2", "micro_ponzi", "micro_invest", "micro_reward",
                                           "loop_without_call"));

}  // namespace
}  // namespace ponzitrace::bytecode
