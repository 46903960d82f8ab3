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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include <ponzitrace/error.hpp>
#include <ponzitrace/ingest.hpp>
#include <ponzitrace/pipeline.hpp>
#include <ponzitrace/report.hpp>
#include <ponzitrace/service.hpp>
#include <ponzitrace/version.hpp>

namespace fs = std::filesystem;
using namespace ponzitrace;

namespace {

fs::path default_cache_dir() {
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path{xdg} / "ponzitrace";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path{home} / ".cache" / "ponzitrace";
    return fs::path{".ponzitrace-cache"};
}

fs::path default_fixtures_dir() {
    if (const char* env = std::getenv("PONZITRACE_FIXTURES"); env && *env) return env;
    return PONZITRACE_DEFAULT_FIXTURES;
}

struct Options {
    std::optional<std::string> address;
    std::optional<std::string> fixture;
    std::optional<std::string> hex_file;
    std::optional<std::string> out;
    paths::Bounds bounds;
    std::string fixtures_dir{default_fixtures_dir().string()};
    std::string cache_dir{default_cache_dir().string()};
    std::string endpoint;
    std::string flavor{"jsonrpc"};
    long timeout_ms{10000};
    unsigned retries{2};
    bool no_network{false};
    int port{8080};
    std::string host{"127.0.0.1"};
    std::optional<std::string> static_dir;
};

std::optional<ingest::ProviderConfig> provider_of(const Options& o) {
    if (o.no_network || o.endpoint.empty()) return std::nullopt;
    ingest::ProviderConfig p;
    p.endpoint = o.endpoint;
    p.flavor = o.flavor == "explorer" ? ingest::Flavor::kExplorer : ingest::Flavor::kJsonRpc;
    p.timeout = std::chrono::milliseconds{o.timeout_ms};
    p.retries = o.retries;
    p.api_key = ingest::ProviderConfig::api_key_from_env();
    p.validate();
    return p;
}

service::Sources sources_of(const Options& o) { return {o.fixtures_dir, o.cache_dir, provider_of(o)}; }

void add_bounds(CLI::App* cmd, Options& o) {
    cmd->add_option("--max-paths", o.bounds.max_paths, "Stop enumeration after this many kept paths")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-blocks", o.bounds.max_blocks_per_path, "Longest path in blocks")->check(CLI::PositiveNumber);
    cmd->add_option("--loop-unroll", o.bounds.loop_unroll, "Times each back edge may be taken per path")
        ->check(CLI::PositiveNumber);
}

void add_sources(CLI::App* cmd, Options& o) {
    cmd->add_option("--fixtures-dir", o.fixtures_dir, "Directory of <name>.hex fixtures");
    cmd->add_option("--cache-dir", o.cache_dir, "Bytecode cache directory");
    cmd->add_option("--endpoint", o.endpoint, "Provider URL for eth_getCode");
    cmd->add_option("--flavor", o.flavor, "Provider flavor")->check(CLI::IsMember({"jsonrpc", "explorer"}));
    cmd->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout in milliseconds");
    cmd->add_option("--retries", o.retries, "Retries after a failed request (at most 5)");
    cmd->add_flag("--no-network", o.no_network, "Never contact the provider");
}

int cmd_analyze(const Options& o) {
    service::Input input;
    input.address = o.address;
    input.fixture = o.fixture;
    if (o.hex_file) input.hex_file = fs::path{*o.hex_file};
    const auto resolved = service::resolve(input, sources_of(o));
    const auto a = analyze(resolved.code, resolved.contract, o.bounds);
    const std::string text = report::serialize(a.report);
    if (o.out) {
        std::ofstream out{*o.out, std::ios::binary | std::ios::trunc};
        out << text;
        if (!out) throw Error{ErrorCode::kInvalidConfig, "cli", "cannot write " + *o.out};
    } else {
        std::cout << text;
    }
    switch (a.report.verdict) {
        case detect::Verdict::kPonziCandidate: return 3;
        case detect::Verdict::kSuspicious: return 2;
        case detect::Verdict::kNoPonziEvidence: return 0;
    }
    return 0;
}

int cmd_fetch(const Options& o) {
    if (!o.address) throw Error{ErrorCode::kInvalidConfig, "cli", "--address is required"};
    const auto ref = ingest::ContractRef::parse(*o.address);
    const auto provider = provider_of(o);
    if (!provider) throw Error{ErrorCode::kInvalidConfig, "cli", "fetch needs --endpoint and network access"};
    const ingest::Cache cache{o.cache_dir};
    const auto code = ingest::fetch_bytecode(ref, *provider, &cache);
    std::cout << ref.address << " 0x" << bytes_to_hex(keccak256(code.bytes)) << " " << code.bytes.size()
              << " bytes\n";
    return 0;
}

int cmd_serve(const Options& o) {
    std::optional<fs::path> static_dir;
    if (o.static_dir) static_dir = fs::path{*o.static_dir};
    service::ReportService svc{sources_of(o), o.bounds, static_dir};
    httplib::Server server;
    svc.install(server);
    std::cerr << "serving on http://" << o.host << ":" << o.port << "\n";
    if (!server.listen(o.host, o.port)) {
        throw Error{ErrorCode::kInvalidConfig, "cli", "cannot listen on " + o.host + ":" + std::to_string(o.port)};
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ponzi-scheme evidence from EVM bytecode", "ponzitrace"};
    app.set_version_flag("--version", std::string{kToolVersion});
    app.require_subcommand(1);
    Options o;

    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one contract and write the report");
    auto* in_address = analyze_cmd->add_option("--address", o.address, "Contract address");
    auto* in_fixture = analyze_cmd->add_option("--fixture", o.fixture, "Fixture name");
    auto* in_hex = analyze_cmd->add_option("--hex-file", o.hex_file, "File holding runtime code as hex");
    in_address->excludes(in_fixture, in_hex);
    in_fixture->excludes(in_hex);
    analyze_cmd->add_option("--out", o.out, "Report path (default: standard output)");
    add_bounds(analyze_cmd, o);
    add_sources(analyze_cmd, o);

    auto* serve_cmd = app.add_subcommand("serve", "Serve reports and the UI bundle over HTTP");
    serve_cmd->add_option("--port", o.port, "Listen port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", o.host, "Listen address");
    serve_cmd->add_option("--static-dir", o.static_dir, "UI bundle served at /")->check(CLI::ExistingDirectory);
    add_bounds(serve_cmd, o);
    add_sources(serve_cmd, o);

    auto* fetch_cmd = app.add_subcommand("fetch", "Fetch runtime code into the cache and print its hash");
    fetch_cmd->add_option("--address", o.address, "Contract address")->required();
    add_sources(fetch_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*analyze_cmd) return cmd_analyze(o);
        if (*serve_cmd) return cmd_serve(o);
        return cmd_fetch(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
