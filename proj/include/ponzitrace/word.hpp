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

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace ponzitrace {

//! 256-bit EVM word. Arithmetic wraps modulo 2^256.
using u256 = boost::multiprecision::uint256_t;

using bytes32 = std::array<std::uint8_t, 32>;

//! Big-endian decode of up to 32 bytes.
u256 word_from_be(std::span<const std::uint8_t> bytes);

bytes32 word_to_be(const u256& value);

std::string to_decimal(const u256& value);

//! Lowercase hex without prefix, no leading zeros ("0" for zero).
std::string to_hex(const u256& value);

//! Lowercase hex of a byte sequence, no prefix.
std::string bytes_to_hex(std::span<const std::uint8_t> bytes);

//! Keccak-256 (the pre-standard variant used by Ethereum, not FIPS SHA3-256).
bytes32 keccak256(std::span<const std::uint8_t> data);

}  // namespace ponzitrace
