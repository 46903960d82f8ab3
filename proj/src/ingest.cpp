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

#include <ponzitrace/ingest.hpp>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <system_error>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include <ponzitrace/error.hpp>
#include <ponzitrace/word.hpp>

namespace ponzitrace::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kModule = "ingest";

struct Url {
    std::string base;  // scheme://host[:port]
    std::string path;
};

std::optional<Url> split_url(const std::string& endpoint) {
    static const std::regex re{R"(^(https?://[^/?#]+)(/[^#]*)?$)", std::regex::icase};
    std::smatch m;
    if (!std::regex_match(endpoint, m, re)) return std::nullopt;
    return Url{m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string hash_hex(std::span<const std::uint8_t> bytes) { return "0x" + bytes_to_hex(keccak256(bytes)); }

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

//! Extracts the code hex from a provider response body.
std::string code_from_response(const std::string& body, Flavor flavor) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception&) {
        throw Error{ErrorCode::kProviderError, kModule, "malformed response: " + excerpt(body)};
    }
    if (!doc.is_object()) throw Error{ErrorCode::kProviderError, kModule, "malformed response: " + excerpt(body)};
    if (doc.contains("error")) {
        throw Error{ErrorCode::kProviderError, kModule, "provider error: " + excerpt(doc["error"].dump())};
    }
    if (flavor == Flavor::kExplorer && doc.value("status", "") == "0") {
        throw Error{ErrorCode::kProviderError, kModule,
                    doc.value("message", "NOTOK") + ": " + excerpt(doc.value("result", ""))};
    }
    if (!doc.contains("result") || !doc["result"].is_string()) {
        throw Error{ErrorCode::kProviderError, kModule, "response has no result: " + excerpt(body)};
    }
    return doc["result"].get<std::string>();
}

}  // namespace

ContractRef ContractRef::parse(std::string_view text, std::string_view chain) {
    std::string s{text};
    if (s.size() == 42 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s = s.substr(2);
    const bool ok = s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
                        return std::isxdigit(static_cast<unsigned char>(c)) != 0;
                    });
    if (!ok) throw Error{ErrorCode::kInvalidAddress, kModule, "not a 20-byte hex address: '" + std::string{text} + "'"};
    return ContractRef{"0x" + lower(s), std::string{chain}};
}

void ProviderConfig::validate() const {
    if (timeout.count() <= 0) throw Error{ErrorCode::kInvalidConfig, kModule, "timeout must be positive"};
    if (retries > 5) throw Error{ErrorCode::kInvalidConfig, kModule, "retries must be at most 5"};
    if (!split_url(endpoint)) {
        throw Error{ErrorCode::kInvalidConfig, kModule, "endpoint is not an http(s) URL: '" + endpoint + "'"};
    }
}

std::optional<std::string> ProviderConfig::api_key_from_env(std::string_view variable) {
    const char* v = std::getenv(std::string{variable}.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string{v};
}

std::string render_annotated(const CacheEntry& e) {
    std::ostringstream out;
    out << "# address: " << e.address << "\n";
    out << "# chain: " << e.chain << "\n";
    out << "# retrieved: " << e.fetched_at << "\n";
    out << "# code_hash: " << e.code_hash << "\n";
    if (!e.origin.empty()) out << "# origin: " << e.origin << "\n";
    out << bytes_to_hex(e.bytes) << "\n";
    return out.str();
}

Annotated parse_annotated(std::string_view text) {
    Annotated out;
    std::string body;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            out.metadata[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
        } else {
            body += line;
            body += '\n';
        }
    }
    try {
        out.bytes = bytecode::parse_hex(body).bytes;
    } catch (const Error& e) {
        throw Error{ErrorCode::kParseError, kModule, std::string{"bad hex body: "} + e.what()};
    }
    return out;
}

fs::path Cache::path_for(const std::string& address) const { return dir_ / lower(address); }

std::optional<CacheEntry> Cache::load(const ContractRef& ref) const {
    const auto path = path_for(ref.address);
    std::ifstream in{path, std::ios::binary};
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    const Annotated a = parse_annotated(ss.str());
    CacheEntry e;
    e.address = ref.address;
    e.chain = a.metadata.contains("chain") ? a.metadata.at("chain") : ref.chain;
    e.bytes = a.bytes;
    e.code_hash = hash_hex(e.bytes);
    e.fetched_at = a.metadata.contains("retrieved") ? a.metadata.at("retrieved") : "";
    e.origin = a.metadata.contains("origin") ? a.metadata.at("origin") : "";
    if (a.metadata.contains("code_hash") && lower(a.metadata.at("code_hash")) != e.code_hash) {
        throw Error{ErrorCode::kHashMismatch, kModule, "cache entry " + path.string() + " fails its hash check"};
    }
    return e;
}

void Cache::store(const CacheEntry& entry) const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const auto target = path_for(entry.address);
    auto tmp = target;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        out << render_annotated(entry);
        if (!out) throw Error{ErrorCode::kProviderError, kModule, "cannot write cache file " + tmp.string()};
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error{ErrorCode::kProviderError, kModule, "cannot move cache file into " + target.string()};
    }
}

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bytecode::Bytecode fetch_bytecode(const ContractRef& ref, const ProviderConfig& config, const Cache* cache) {
    const ContractRef checked = ContractRef::parse(ref.address, ref.chain);
    if (cache) {
        if (auto hit = cache->load(checked)) {
            if (hit->bytes.empty()) throw Error{ErrorCode::kEmptyCode, kModule, checked.address + " has no code"};
            return bytecode::Bytecode{hit->bytes, bytecode::Source::kExplorer};
        }
    }
    config.validate();
    const Url url = *split_url(config.endpoint);

    httplib::Client client{url.base};
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    std::string last_failure;
    auto delay = config.backoff;
    for (unsigned attempt = 0; attempt <= config.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        httplib::Result res;
        if (config.flavor == Flavor::kExplorer) {
            httplib::Params params{{"module", "proxy"}, {"action", "eth_getCode"},
                                   {"address", checked.address}, {"tag", "latest"}};
            if (config.api_key) params.emplace("apikey", *config.api_key);
            res = client.Get(url.path, params, httplib::Headers{});
        } else {
            const json body = {{"jsonrpc", "2.0"},
                               {"id", 1},
                               {"method", "eth_getCode"},
                               {"params", {checked.address, "latest"}}};
            res = client.Post(url.path, body.dump(), "application/json");
        }
        if (!res) {
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            if (retryable_status(res->status) && attempt < config.retries) continue;
            throw Error{ErrorCode::kProviderError, kModule,
                        "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body)};
        }
        const std::string hex = code_from_response(res->body, config.flavor);
        bytecode::Bytecode code;
        const std::string stripped = hex.starts_with("0x") || hex.starts_with("0X") ? hex.substr(2) : hex;
        if (stripped.empty()) throw Error{ErrorCode::kEmptyCode, kModule, checked.address + " has no code"};
        try {
            code = bytecode::parse_hex(hex, bytecode::Source::kExplorer);
        } catch (const Error& e) {
            throw Error{ErrorCode::kProviderError, kModule, std::string{"bad code in response: "} + e.what()};
        }
        if (cache) {
            cache->store(CacheEntry{checked.address, checked.chain, hash_hex(code.bytes), code.bytes, now_iso8601(),
                                    url.base + url.path});
        }
        return code;
    }
    throw Error{ErrorCode::kTimeout, kModule,
                "no response from " + url.base + " after " + std::to_string(config.retries + 1) +
                    " attempts (" + last_failure + ")"};
}

Fixture load_fixture(std::string_view name, const fs::path& fixtures_dir) {
    const bool safe = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
                          return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
                      });
    const fs::path path = fixtures_dir / (std::string{name} + ".hex");
    std::ifstream in{path, std::ios::binary};
    if (!safe || !in) throw Error{ErrorCode::kNotFound, kModule, "no fixture named '" + std::string{name} + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    Annotated a = parse_annotated(ss.str());

    Fixture f;
    f.name = std::string{name};
    f.metadata = a.metadata;
    f.code_hash = hash_hex(a.bytes);
    auto recorded = a.metadata.find("code_hash");
    if (recorded == a.metadata.end()) {
        throw Error{ErrorCode::kParseError, kModule, "fixture '" + f.name + "' has no code_hash header"};
    }
    if (lower(recorded->second) != f.code_hash) {
        throw Error{ErrorCode::kHashMismatch, kModule,
                    "fixture '" + f.name + "' hashes to " + f.code_hash + ", header says " + recorded->second};
    }
    if (auto addr = a.metadata.find("address"); addr != a.metadata.end() && addr->second != "none") {
        const auto chain = a.metadata.contains("chain") ? a.metadata.at("chain") : std::string{kDefaultChain};
        try {
            f.ref = ContractRef::parse(addr->second, chain);
        } catch (const Error&) {
            throw Error{ErrorCode::kParseError, kModule, "fixture '" + f.name + "' has a malformed address header"};
        }
    }
    f.code = bytecode::Bytecode{std::move(a.bytes), bytecode::Source::kFixture};
    return f;
}

}  // namespace ponzitrace::ingest
