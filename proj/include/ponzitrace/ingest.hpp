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

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <ponzitrace/bytecode.hpp>

namespace ponzitrace::ingest {

inline constexpr std::string_view kDefaultChain = "ethereum-mainnet";
inline constexpr std::string_view kApiKeyVariable = "ETHERSCAN_API_KEY";

struct ContractRef {
    //! 0x-prefixed, lowercase, 40 hex digits.
    std::string address;
    std::string chain{kDefaultChain};

    //! Accepts any letter case; throws Error(kInvalidAddress).
    static ContractRef parse(std::string_view text, std::string_view chain = kDefaultChain);

    friend bool operator==(const ContractRef&, const ContractRef&) = default;
};

enum class Flavor { kExplorer, kJsonRpc };

struct ProviderConfig {
    //! http(s)://host[:port][/path]
    std::string endpoint;
    Flavor flavor{Flavor::kJsonRpc};
    std::optional<std::string> api_key;
    std::chrono::milliseconds timeout{10000};
    unsigned retries{2};
    //! First retry delay; doubles per attempt.
    std::chrono::milliseconds backoff{250};

    //! Throws Error(kInvalidConfig) unless timeout > 0, retries <= 5 and the
    //! endpoint is an http(s) URL.
    void validate() const;

    //! API key from the environment, if set and non-empty.
    static std::optional<std::string> api_key_from_env(std::string_view variable = kApiKeyVariable);
};

struct CacheEntry {
    std::string address;
    std::string chain{kDefaultChain};
    //! 0x-prefixed keccak256 of bytes.
    std::string code_hash;
    std::vector<std::uint8_t> bytes;
    //! ISO-8601 UTC.
    std::string fetched_at;
    std::string origin;
};

//! Header lines "# key: value" followed by the hex body.
std::string render_annotated(const CacheEntry& entry);

struct Annotated {
    std::map<std::string, std::string> metadata;
    std::vector<std::uint8_t> bytes;
};

//! Throws Error(kParseError) on malformed hex or headers.
Annotated parse_annotated(std::string_view text);

/**
 * One file per address, named by the lowercase address. Writes go to a
 * temporary file that is renamed into place.
 */
class Cache {
  public:
    explicit Cache(std::filesystem::path dir) : dir_{std::move(dir)} {}

    [[nodiscard]] std::optional<CacheEntry> load(const ContractRef& ref) const;
    void store(const CacheEntry& entry) const;
    [[nodiscard]] std::filesystem::path path_for(const std::string& address) const;

  private:
    std::filesystem::path dir_;
};

std::string now_iso8601();

/**
 * Runtime code of the contract. A cache hit returns without touching the
 * network; a successful fetch is written to the cache.
 *
 * Throws Error with kInvalidAddress, kEmptyCode, kProviderError (status and
 * body excerpt) or kTimeout (no response after all retries).
 */
bytecode::Bytecode fetch_bytecode(const ContractRef& ref, const ProviderConfig& config, const Cache* cache = nullptr);

struct Fixture {
    std::string name;
    std::optional<ContractRef> ref;
    bytecode::Bytecode code;
    std::string code_hash;
    std::map<std::string, std::string> metadata;
};

/**
 * Reads <fixtures_dir>/<name>.hex. Throws Error with kNotFound, kHashMismatch
 * when the recorded code_hash disagrees with the body, or kParseError.
 */
Fixture load_fixture(std::string_view name, const std::filesystem::path& fixtures_dir);

}  // namespace ponzitrace::ingest
