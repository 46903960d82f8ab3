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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <ponzitrace/cfg.hpp>
#include <ponzitrace/paths.hpp>

namespace ponzitrace::detect {

using cfg::BlockId;

struct EventRef {
    BlockId block{0};
    std::size_t offset{0};
    friend auto operator<=>(const EventRef&, const EventRef&) = default;
};

struct C1Evidence {
    std::size_t aggregate{0};
    std::string shared_slot;
    EventRef invest_event;
    EventRef reward_event;
    friend auto operator<=>(const C1Evidence&, const C1Evidence&) = default;
};

struct C1Verdict {
    bool satisfied{false};
    std::vector<C1Evidence> evidence;
};

struct C2Evidence {
    std::size_t aggregate{0};
    BlockId loop_header{0};
    friend auto operator<=>(const C2Evidence&, const C2Evidence&) = default;
};

struct C2Verdict {
    bool satisfied{false};
    std::vector<C2Evidence> evidence;
};

enum class Verdict { kPonziCandidate, kSuspicious, kNoPonziEvidence };

std::string_view to_string(Verdict v) noexcept;

//! (true,true) ponzi_candidate, exactly one suspicious, neither no_ponzi_evidence.
Verdict verdict_of(bool c1, bool c2) noexcept;

/**
 * Per aggregate with both flags: slots of caller-tainted invest events
 * intersected with reward target slots. Unknown slots never match.
 */
C1Verdict evaluate_c1(const std::vector<paths::AggregatedPath>& aggregates);

//! Rewarding aggregates carrying a loop whose body holds a CALL.
C2Verdict evaluate_c2(const std::vector<paths::AggregatedPath>& aggregates);

//! first-3 + "..." + last-2 for text longer than 8 characters.
std::string abbreviate(const std::string& text);

struct ContractInfo {
    //! 0x-prefixed lowercase, empty for raw hex input.
    std::string address;
    std::string fixture;
    std::string chain{"ethereum-mainnet"};
    //! keccak256 of the code, 0x-prefixed.
    std::string code_hash;
    //! Deployed runtime code, never creation code.
    std::string code_kind{"runtime"};
};

struct CfgSummary {
    std::size_t block_count{0};
    std::size_t edge_count{0};
    std::size_t unresolved_jump_count{0};
    std::size_t back_edge_count{0};
    std::size_t irreducible_edge_count{0};
};

struct CriticalInstruction {
    std::size_t offset{0};
    std::string mnemonic;
};

struct BlockSummary {
    BlockId id{0};
    std::size_t start_offset{0};
    std::size_t end_offset{0};
    std::string terminator;
    std::vector<CriticalInstruction> critical;
};

struct InvestSummary {
    BlockId block{0};
    std::size_t offset{0};
    std::string slot;
    std::string match;
    std::vector<std::string> taint;
    std::string stored_value;
};

struct RewardSummary {
    BlockId block{0};
    std::size_t offset{0};
    std::vector<std::string> target_slots;
    std::vector<std::string> taint;
    std::string target;
    std::string value;
};

struct LoopSummary {
    BlockId header{0};
    std::vector<BlockId> body;
    bool contains_call{false};
    std::size_t unroll_count_used{0};
};

struct AggregateSummary {
    std::size_t index{0};
    std::string name;
    std::string signature;
    bool is_investing{false};
    bool is_rewarding{false};
    std::vector<std::vector<BlockId>> member_paths;
    std::vector<BlockId> union_blocks;
    std::vector<std::pair<BlockId, BlockId>> union_edges;
    std::vector<std::string> slots_written;
    std::vector<std::string> slots_read;
    //! Events of the first member; the others share the signature.
    std::vector<InvestSummary> invest_events;
    std::vector<RewardSummary> reward_events;
    std::vector<LoopSummary> loops;
};

struct SlotSummary {
    std::string canonical_key;
    //! state_variable | array_or_mapping | unknown
    std::string kind;
    std::string display;
    std::string data_address;
    std::vector<std::size_t> read_by;
    std::vector<std::size_t> written_by;
};

struct AnalysisReport {
    ContractInfo contract;
    CfgSummary cfg;
    std::vector<BlockSummary> blocks;
    std::vector<AggregateSummary> aggregates;
    std::vector<SlotSummary> storage_slots;
    C1Verdict c1;
    C2Verdict c2;
    Verdict verdict{Verdict::kNoPonziEvidence};
    std::vector<std::string> diagnostics;
    paths::Bounds bounds;
    paths::EnumerationStats stats;
    std::string tool_version;
};

/**
 * Assembles the report. Lists are sorted: aggregates by index, slots by
 * canonical key, diagnostics lexicographically, evidence by aggregate.
 */
AnalysisReport build_report(const ContractInfo& contract, const cfg::Cfg& cfg,
                            const std::vector<paths::AggregatedPath>& aggregates, const C1Verdict& c1,
                            const C2Verdict& c2, std::vector<std::string> diagnostics = {},
                            const paths::Bounds& bounds = {}, const paths::EnumerationStats& stats = {});

}  // namespace ponzitrace::detect
