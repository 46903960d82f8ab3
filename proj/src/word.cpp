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

#include <ponzitrace/word.hpp>

#include <algorithm>
#include <bit>
#include <cstring>

namespace ponzitrace {

u256 word_from_be(std::span<const std::uint8_t> bytes) {
    u256 value = 0;
    for (std::uint8_t b : bytes.first(std::min<std::size_t>(bytes.size(), 32))) {
        value = (value << 8) | b;
    }
    return value;
}

bytes32 word_to_be(const u256& value) {
    bytes32 out{};
    u256 v = value;
    for (std::size_t i = 0; i < 32; ++i) {
        out[31 - i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string to_decimal(const u256& value) { return value.str(); }

std::string to_hex(const u256& value) {
    static constexpr char kDigits[] = "0123456789abcdef";
    if (value == 0) return "0";
    std::string out;
    u256 v = value;
    while (v != 0) {
        out.push_back(kDigits[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xf]);
    }
    return out;
}

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr std::array<int, 24> kRotations = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                            27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};

constexpr std::array<int, 24> kPiLanes = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                          15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

void keccak_f1600(std::array<std::uint64_t, 25>& st) {
    for (std::uint64_t rc : kRoundConstants) {
        std::array<std::uint64_t, 5> c{};
        for (int x = 0; x < 5; ++x) c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
        for (int x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) st[y + x] ^= d;
        }
        // rho + pi
        std::uint64_t carry = st[1];
        for (int i = 0; i < 24; ++i) {
            const int lane = kPiLanes[i];
            const std::uint64_t tmp = st[lane];
            st[lane] = std::rotl(carry, kRotations[i]);
            carry = tmp;
        }
        // chi
        for (int y = 0; y < 25; y += 5) {
            std::array<std::uint64_t, 5> row{};
            for (int x = 0; x < 5; ++x) row[x] = st[y + x];
            for (int x = 0; x < 5; ++x) st[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        st[0] ^= rc;
    }
}

}  // namespace

bytes32 keccak256(std::span<const std::uint8_t> data) {
    constexpr std::size_t kRate = 136;
    std::array<std::uint64_t, 25> st{};

    auto absorb = [&st](const std::uint8_t* block) {
        for (std::size_t i = 0; i < kRate / 8; ++i) {
            std::uint64_t lane = 0;
            for (int b = 7; b >= 0; --b) lane = (lane << 8) | block[i * 8 + b];
            st[i] ^= lane;
        }
        keccak_f1600(st);
    };

    std::size_t pos = 0;
    for (; pos + kRate <= data.size(); pos += kRate) absorb(data.data() + pos);

    std::array<std::uint8_t, kRate> last{};
    const std::size_t rest = data.size() - pos;
    if (rest > 0) std::memcpy(last.data(), data.data() + pos, rest);
    last[rest] ^= 0x01;
    last[kRate - 1] ^= 0x80;
    absorb(last.data());

    bytes32 out{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<std::uint8_t>(st[i] >> (8 * b));
    }
    return out;
}

}  // namespace ponzitrace
