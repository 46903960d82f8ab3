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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <ponzitrace/bytecode.hpp>
#include <ponzitrace/ingest.hpp>

namespace ponzitrace::test {

inline const std::filesystem::path kFixturesDir{PONZITRACE_FIXTURES_DIR};
inline const std::filesystem::path kDataDir{PONZITRACE_TEST_DATA_DIR};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in{p, std::ios::binary};
    if (!in) throw std::runtime_error{"cannot read " + p.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::vector<std::string> out;
    std::istringstream in{read_file(p)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

inline bytecode::Bytecode fixture_code(std::string_view name) {
    return ingest::load_fixture(name, kFixturesDir).code;
}

/**
 * Tiny assembler: whitespace-separated mnemonics; a PUSHn is followed by
 * its immediate in hex ("PUSH1 0x04"). "@label" defines a label at the next
 * instruction and ":label" as a PUSH1 immediate refers to it.
 */
inline bytecode::Bytecode assemble(std::string_view text) {
    std::vector<std::string> tokens;
    std::istringstream in{std::string{text}};
    for (std::string t; in >> t;) tokens.push_back(t);

    auto opcode_of = [](const std::string& m) {
        for (int b = 0; b < 256; ++b) {
            const auto& s = bytecode::opcode_spec(static_cast<std::uint8_t>(b));
            if (s.is_defined && s.mnemonic == m) return static_cast<std::uint8_t>(b);
        }
        throw std::runtime_error{"unknown mnemonic " + m};
    };

    std::map<std::string, std::size_t> labels;
    std::vector<std::pair<std::size_t, std::string>> fixups;
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t[0] == '@') {
            labels[t.substr(1)] = out.size();
            continue;
        }
        const std::uint8_t op = opcode_of(t);
        out.push_back(op);
        const auto n = bytecode::opcode_spec(op).immediate_len;
        if (n == 0) continue;
        const std::string imm = tokens.at(++i);
        if (imm[0] == ':') {
            if (n != 1) throw std::runtime_error{"labels need PUSH1"};
            fixups.emplace_back(out.size(), imm.substr(1));
            out.push_back(0);
            continue;
        }
        std::string hex = imm.substr(imm.starts_with("0x") ? 2 : 0);
        if (hex.size() % 2) hex = "0" + hex;
        if (hex.size() > 2u * n) throw std::runtime_error{"immediate too wide: " + imm};
        hex = std::string(2u * n - hex.size(), '0') + hex;
        for (std::size_t k = 0; k < hex.size(); k += 2) {
            out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(k, 2), nullptr, 16)));
        }
    }
    for (const auto& [pos, label] : fixups) out[pos] = static_cast<std::uint8_t>(labels.at(label));
    return bytecode::Bytecode{out, bytecode::Source::kInline};
}

}  // namespace ponzitrace::test
