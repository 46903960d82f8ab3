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
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <ponzitrace/ingest.hpp>
#include <ponzitrace/pipeline.hpp>

namespace httplib {
class Server;
}

namespace ponzitrace::service {

struct Sources {
    std::filesystem::path fixtures_dir;
    std::filesystem::path cache_dir;
    //! nullopt disables network fetches.
    std::optional<ingest::ProviderConfig> provider;
};

struct Input {
    std::optional<std::string> address;
    std::optional<std::string> fixture;
    std::optional<std::filesystem::path> hex_file;
};

struct Resolved {
    bytecode::Bytecode code;
    detect::ContractInfo contract;
};

/**
 * Loads the code for exactly one input selector. An address is looked up
 * among the fixtures first, then in the cache, then fetched if a provider is
 * configured. Throws Error(kInvalidConfig) unless exactly one selector is set.
 */
Resolved resolve(const Input& input, const Sources& sources);

//! Fixture whose address header matches, if any.
std::optional<std::string> fixture_for_address(const std::string& address, const std::filesystem::path& fixtures_dir);

struct Response {
    int status{200};
    std::string body;
    std::string content_type{"application/json"};
};

/**
 * Read-only analysis service. Analyses are memoized per input; concurrent
 * identical requests share one computation. Failures are not memoized.
 */
class ReportService {
  public:
    ReportService(Sources sources, paths::Bounds bounds, std::optional<std::filesystem::path> static_dir = {});

    //! Query parameters: address or fixture.
    Response report(const std::map<std::string, std::string>& query);
    Response opcodes(const std::map<std::string, std::string>& query);
    Response health() const;

    //! Registers /api/report, /api/opcodes, /api/health and the static mount.
    void install(httplib::Server& server);

    //! Number of analyses actually run.
    [[nodiscard]] std::size_t computations() const;

  private:
    struct Entry {
        Analysis analysis;
        std::string report_body;
        std::string opcodes_body;
    };
    using EntryPtr = std::shared_ptr<const Entry>;

    EntryPtr get(const std::map<std::string, std::string>& query);
    Response failure(const std::exception& e) const;

    Sources sources_;
    paths::Bounds bounds_;
    std::optional<std::filesystem::path> static_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, EntryPtr> done_;
    std::map<std::string, std::shared_future<EntryPtr>> in_flight_;
    std::size_t computations_{0};
};

//! HTTP status for an error raised while answering a request.
int status_for(const std::exception& e) noexcept;

}  // namespace ponzitrace::service
