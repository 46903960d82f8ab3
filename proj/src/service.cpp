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

#include <ponzitrace/service.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <httplib.h>

#include <ponzitrace/error.hpp>
#include <ponzitrace/report.hpp>
#include <ponzitrace/version.hpp>

namespace ponzitrace::service {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "cli";

detect::ContractInfo info_of(const ingest::Fixture& f) {
    detect::ContractInfo c;
    c.fixture = f.name;
    if (f.ref) {
        c.address = f.ref->address;
        c.chain = f.ref->chain;
    }
    c.code_hash = f.code_hash;
    return c;
}

std::string json_error(int status, const std::string& message, const std::string& diagnostic_id = {}) {
    report::Json doc = {{"status", status}, {"error", message}};
    if (!diagnostic_id.empty()) doc["diagnostic_id"] = diagnostic_id;
    return doc.dump() + "\n";
}

std::string diagnostic_id() {
    static std::atomic<unsigned> counter{0};
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    std::ostringstream out;
    out << std::hex << std::chrono::duration_cast<std::chrono::milliseconds>(now).count() << "-" << counter++;
    return out.str();
}

std::map<std::string, std::string> params_of(const httplib::Request& req) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : req.params) out.emplace(k, v);
    return out;
}

void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
}

}  // namespace

std::optional<std::string> fixture_for_address(const std::string& address, const fs::path& fixtures_dir) {
    std::error_code ec;
    if (!fs::is_directory(fixtures_dir, ec)) return std::nullopt;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(fixtures_dir, ec)) {
        if (e.path().extension() == ".hex") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        std::ifstream in{p};
        std::string line;
        while (std::getline(in, line) && !line.empty() && line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(1, colon - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            if (key != "address") continue;
            try {
                if (ingest::ContractRef::parse(line.substr(line.find_first_not_of(' ', colon + 1))).address == address) {
                    return p.stem().string();
                }
            } catch (const std::exception&) {
            }
        }
    }
    return std::nullopt;
}

Resolved resolve(const Input& input, const Sources& sources) {
    const int selected = int{input.address.has_value()} + int{input.fixture.has_value()} + int{input.hex_file.has_value()};
    if (selected != 1) {
        throw Error{ErrorCode::kInvalidConfig, kModule, "exactly one of --address, --fixture, --hex-file is required"};
    }
    if (input.fixture) {
        const auto f = ingest::load_fixture(*input.fixture, sources.fixtures_dir);
        return {f.code, info_of(f)};
    }
    if (input.hex_file) {
        std::ifstream in{*input.hex_file, std::ios::binary};
        if (!in) throw Error{ErrorCode::kNotFound, kModule, "cannot read " + input.hex_file->string()};
        std::stringstream ss;
        ss << in.rdbuf();
        Resolved r{bytecode::parse_hex(ss.str()), {}};
        r.contract.chain.clear();
        return r;
    }
    const auto ref = ingest::ContractRef::parse(*input.address);
    if (auto name = fixture_for_address(ref.address, sources.fixtures_dir)) {
        const auto f = ingest::load_fixture(*name, sources.fixtures_dir);
        return {f.code, info_of(f)};
    }
    const ingest::Cache cache{sources.cache_dir};
    detect::ContractInfo info;
    info.address = ref.address;
    info.chain = ref.chain;
    if (auto hit = cache.load(ref)) {
        if (hit->bytes.empty()) throw Error{ErrorCode::kEmptyCode, "ingest", ref.address + " has no code"};
        info.code_hash = hit->code_hash;
        return {bytecode::Bytecode{hit->bytes, bytecode::Source::kExplorer}, info};
    }
    if (!sources.provider) {
        throw Error{ErrorCode::kNotFound, kModule, ref.address + " is not cached and network access is disabled"};
    }
    return {ingest::fetch_bytecode(ref, *sources.provider, &cache), info};
}

int status_for(const std::exception& e) noexcept {
    const auto* err = dynamic_cast<const Error*>(&e);
    if (err == nullptr) return 500;
    switch (err->code()) {
        case ErrorCode::kInvalidAddress:
        case ErrorCode::kInvalidConfig:
            return 400;
        case ErrorCode::kNotFound:
        case ErrorCode::kEmptyCode:
            return 404;
        case ErrorCode::kProviderError:
        case ErrorCode::kTimeout:
            return 502;
        default:
            return 500;
    }
}

ReportService::ReportService(Sources sources, paths::Bounds bounds, std::optional<fs::path> static_dir)
    : sources_{std::move(sources)}, bounds_{bounds}, static_dir_{std::move(static_dir)} {}

ReportService::EntryPtr ReportService::get(const std::map<std::string, std::string>& query) {
    Input input;
    auto address = query.find("address");
    auto fixture = query.find("fixture");
    if (address != query.end()) input.address = address->second;
    if (fixture != query.end()) input.fixture = fixture->second;
    if (input.address.has_value() == input.fixture.has_value()) {
        throw Error{ErrorCode::kInvalidConfig, kModule, "exactly one of address or fixture is required"};
    }
    const std::string key =
        input.address ? "address:" + ingest::ContractRef::parse(*input.address).address : "fixture:" + *input.fixture;

    std::promise<EntryPtr> promise;
    {
        std::unique_lock lock{mutex_};
        if (auto it = done_.find(key); it != done_.end()) return it->second;
        if (auto it = in_flight_.find(key); it != in_flight_.end()) {
            auto shared = it->second;
            lock.unlock();
            return shared.get();
        }
        in_flight_.emplace(key, promise.get_future().share());
        ++computations_;
    }
    try {
        auto resolved = resolve(input, sources_);
        auto entry = std::make_shared<Entry>();
        entry->analysis = analyze(resolved.code, resolved.contract, bounds_);
        entry->report_body = report::serialize(entry->analysis.report);
        entry->opcodes_body = report::dump(report::opcodes_json(entry->analysis.cfg));
        EntryPtr ptr = std::move(entry);
        std::lock_guard lock{mutex_};
        done_.emplace(key, ptr);
        in_flight_.erase(key);
        promise.set_value(ptr);
        return ptr;
    } catch (...) {
        std::lock_guard lock{mutex_};
        in_flight_.erase(key);
        promise.set_exception(std::current_exception());
        throw;
    }
}

Response ReportService::failure(const std::exception& e) const {
    const int status = status_for(e);
    if (status == 500) {
        const std::string id = diagnostic_id();
        std::cerr << "[serve] internal error " << id << ": " << e.what() << "\n";
        return {status, json_error(status, "internal error", id)};
    }
    return {status, json_error(status, e.what())};
}

Response ReportService::report(const std::map<std::string, std::string>& query) {
    try {
        return {200, get(query)->report_body};
    } catch (const std::exception& e) {
        return failure(e);
    }
}

Response ReportService::opcodes(const std::map<std::string, std::string>& query) {
    try {
        return {200, get(query)->opcodes_body};
    } catch (const std::exception& e) {
        return failure(e);
    }
}

Response ReportService::health() const {
    const report::Json doc = {{"status", "ok"},
                              {"version", std::string{kToolVersion}},
                              {"schema_version", kReportSchemaVersion},
                              {"network", sources_.provider.has_value()}};
    return {200, doc.dump() + "\n"};
}

std::size_t ReportService::computations() const {
    std::lock_guard lock{mutex_};
    return computations_;
}

void ReportService::install(httplib::Server& server) {
    server.Get("/api/report", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, report(params_of(req)));
    });
    server.Get("/api/opcodes", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, opcodes(params_of(req)));
    });
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
    server.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            reply(res, failure(e));
        } catch (...) {
            reply(res, failure(std::runtime_error{"unknown exception"}));
        }
    });
    if (static_dir_ && fs::is_directory(*static_dir_)) server.set_mount_point("/", static_dir_->string());
}

}  // namespace ponzitrace::service
