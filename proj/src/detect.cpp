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

#include <ponzitrace/detect.hpp>

#include <algorithm>
#include <map>
#include <set>

#include <ponzitrace/version.hpp>

namespace ponzitrace::detect {

using paths::AggregatedPath;
using symexec::StorageSlot;

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::kPonziCandidate: return "ponzi_candidate";
        case Verdict::kSuspicious: return "suspicious";
        case Verdict::kNoPonziEvidence: return "no_ponzi_evidence";
    }
    return "no_ponzi_evidence";
}

Verdict verdict_of(bool c1, bool c2) noexcept {
    if (c1 && c2) return Verdict::kPonziCandidate;
    if (c1 || c2) return Verdict::kSuspicious;
    return Verdict::kNoPonziEvidence;
}

C1Verdict evaluate_c1(const std::vector<AggregatedPath>& aggregates) {
    C1Verdict out;
    for (const auto& agg : aggregates) {
        if (!agg.is_investing || !agg.is_rewarding) continue;
        std::map<std::string, EventRef> invest;
        std::map<std::string, EventRef> reward;
        for (const auto& p : agg.member_paths) {
            for (const auto& e : p.effects.invest_events) {
                if (e.slot.kind() == StorageSlot::Kind::kUnknown) continue;
                invest.try_emplace(e.slot.canonical_key(), EventRef{e.block, e.offset});
            }
            for (const auto& e : p.effects.reward_events) {
                for (const auto& s : e.target_slots) {
                    if (s.kind() == StorageSlot::Kind::kUnknown) continue;
                    reward.try_emplace(s.canonical_key(), EventRef{e.block, e.offset});
                }
            }
        }
        for (const auto& [key, ref] : invest) {
            auto r = reward.find(key);
            if (r != reward.end()) out.evidence.push_back({agg.index, key, ref, r->second});
        }
    }
    std::sort(out.evidence.begin(), out.evidence.end());
    out.satisfied = !out.evidence.empty();
    return out;
}

C2Verdict evaluate_c2(const std::vector<AggregatedPath>& aggregates) {
    C2Verdict out;
    for (const auto& agg : aggregates) {
        if (!agg.is_rewarding) continue;
        for (const auto& l : agg.loop_annotations) {
            if (l.contains_call) out.evidence.push_back({agg.index, l.header});
        }
    }
    std::sort(out.evidence.begin(), out.evidence.end());
    out.evidence.erase(std::unique(out.evidence.begin(), out.evidence.end()), out.evidence.end());
    out.satisfied = !out.evidence.empty();
    return out;
}

std::string abbreviate(const std::string& text) {
    if (text.size() <= 8) return text;
    return text.substr(0, 3) + "..." + text.substr(text.size() - 2);
}

namespace {

bool is_critical(std::uint8_t op) {
    namespace o = bytecode::op;
    return op == o::kCaller || op == o::kSstore || op == o::kSload || op == o::kCall;
}

std::string slot_display(const StorageSlot& s) {
    if (s.kind() == StorageSlot::Kind::kStateVariable) return abbreviate(to_decimal(s.number()));
    const std::string data = s.data_address();
    return abbreviate(data.empty() ? s.canonical_key() : data);
}

std::string kind_name(const StorageSlot& s) { return std::string{to_string(s.kind())}; }

}  // namespace

AnalysisReport build_report(const ContractInfo& contract, const cfg::Cfg& cfg,
                            const std::vector<AggregatedPath>& aggregates, const C1Verdict& c1,
                            const C2Verdict& c2, std::vector<std::string> diagnostics,
                            const paths::Bounds& bounds, const paths::EnumerationStats& stats) {
    AnalysisReport r;
    r.contract = contract;
    r.cfg = {cfg.blocks.size(), cfg.edges.size(), cfg.unresolved_jumps.size(), cfg.back_edges.size(),
             cfg.irreducible_edges.size()};
    r.bounds = bounds;
    r.stats = stats;
    r.tool_version = std::string{kToolVersion};

    for (const auto& b : cfg.blocks) {
        BlockSummary s{b.id, b.start_offset, b.start_offset, std::string{to_string(b.terminator)}, {}};
        if (!b.instructions.empty()) s.end_offset = b.last().offset + b.last().size() - 1;
        for (const auto& in : b.instructions) {
            if (is_critical(in.opcode)) s.critical.push_back({in.offset, std::string{in.mnemonic()}});
        }
        r.blocks.push_back(std::move(s));
    }

    std::map<std::string, StorageSlot> slots;
    std::map<std::string, std::set<std::size_t>> read_by;
    std::map<std::string, std::set<std::size_t>> written_by;
    auto sorted = aggregates;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    for (const auto& agg : sorted) {
        AggregateSummary a;
        a.index = agg.index;
        a.name = "Path" + std::to_string(agg.index);
        a.signature = agg.signature.render();
        a.is_investing = agg.is_investing;
        a.is_rewarding = agg.is_rewarding;
        for (const auto& p : agg.member_paths) a.member_paths.push_back(p.blocks);
        a.union_blocks.assign(agg.union_blocks.begin(), agg.union_blocks.end());
        a.union_edges.assign(agg.union_edges.begin(), agg.union_edges.end());
        a.slots_written.assign(agg.slots_written.begin(), agg.slots_written.end());
        a.slots_read.assign(agg.slots_read.begin(), agg.slots_read.end());
        for (const auto& p : agg.member_paths) {
            for (const auto& e : p.effects.invest_events) {
                slots.try_emplace(e.slot.canonical_key(), e.slot);
                written_by[e.slot.canonical_key()].insert(agg.index);
            }
            for (const auto& e : p.effects.reward_events) {
                for (const auto& s : e.target_slots) {
                    slots.try_emplace(s.canonical_key(), s);
                    read_by[s.canonical_key()].insert(agg.index);
                }
            }
        }
        if (!agg.member_paths.empty()) {
            const auto& fx = agg.member_paths.front().effects;
            for (const auto& e : fx.invest_events) {
                a.invest_events.push_back({e.block, e.offset, e.slot.canonical_key(),
                                           std::string{to_string(e.match)}, e.stored_value.taint().names(),
                                           e.stored_value.render()});
            }
            for (const auto& e : fx.reward_events) {
                RewardSummary rs{e.block, e.offset, {}, e.target.taint().names(), e.target.render(), e.value.render()};
                for (const auto& s : e.target_slots) rs.target_slots.push_back(s.canonical_key());
                std::sort(rs.target_slots.begin(), rs.target_slots.end());
                rs.target_slots.erase(std::unique(rs.target_slots.begin(), rs.target_slots.end()),
                                      rs.target_slots.end());
                a.reward_events.push_back(std::move(rs));
            }
        }
        for (const auto& l : agg.loop_annotations) {
            a.loops.push_back({l.header, l.body, l.contains_call, l.unroll_count_used});
        }
        r.aggregates.push_back(std::move(a));
    }

    for (const auto& [key, slot] : slots) {
        SlotSummary s{key, kind_name(slot), slot_display(slot), slot.data_address(), {}, {}};
        if (auto it = read_by.find(key); it != read_by.end()) s.read_by.assign(it->second.begin(), it->second.end());
        if (auto it = written_by.find(key); it != written_by.end()) {
            s.written_by.assign(it->second.begin(), it->second.end());
        }
        r.storage_slots.push_back(std::move(s));
    }

    r.c1 = c1;
    r.c2 = c2;
    r.verdict = verdict_of(c1.satisfied, c2.satisfied);
    std::sort(diagnostics.begin(), diagnostics.end());
    diagnostics.erase(std::unique(diagnostics.begin(), diagnostics.end()), diagnostics.end());
    r.diagnostics = std::move(diagnostics);
    return r;
}

}  // namespace ponzitrace::detect
