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

#include <ponzitrace/report.hpp>

#include <ponzitrace/version.hpp>

namespace ponzitrace::report {

namespace {

constexpr std::uint64_t kSafeLimit = std::uint64_t{1} << 53;

template <typename T>
Json numbers(const std::vector<T>& values) {
    Json a = Json::array();
    for (const auto& v : values) a.push_back(number(v));
    return a;
}

Json strings(const std::vector<std::string>& values) { return Json(values); }

Json event_ref(const detect::EventRef& r) { return {{"block", number(r.block)}, {"offset", number(r.offset)}}; }

Json aggregate(const detect::AggregateSummary& a) {
    Json edges = Json::array();
    for (const auto& [from, to] : a.union_edges) edges.push_back({number(from), number(to)});
    Json members = Json::array();
    for (const auto& m : a.member_paths) members.push_back(numbers(m));
    Json invest = Json::array();
    for (const auto& e : a.invest_events) {
        invest.push_back({{"block", number(e.block)},
                          {"offset", number(e.offset)},
                          {"slot", e.slot},
                          {"caller_match", e.match},
                          {"taint", strings(e.taint)},
                          {"stored_value", e.stored_value}});
    }
    Json reward = Json::array();
    for (const auto& e : a.reward_events) {
        reward.push_back({{"block", number(e.block)},
                          {"offset", number(e.offset)},
                          {"target_slots", strings(e.target_slots)},
                          {"taint", strings(e.taint)},
                          {"target", e.target},
                          {"value", e.value}});
    }
    Json loops = Json::array();
    for (const auto& l : a.loops) {
        loops.push_back({{"header", number(l.header)},
                         {"body", numbers(l.body)},
                         {"contains_call", l.contains_call},
                         {"unroll_count_used", number(l.unroll_count_used)}});
    }
    return {{"index", number(a.index)},
            {"name", a.name},
            {"signature", a.signature},
            {"is_investing", a.is_investing},
            {"is_rewarding", a.is_rewarding},
            {"member_count", number(a.member_paths.size())},
            {"member_paths", members},
            {"union_blocks", numbers(a.union_blocks)},
            {"union_edges", edges},
            {"slots_written", strings(a.slots_written)},
            {"slots_read", strings(a.slots_read)},
            {"invest_events", invest},
            {"reward_events", reward},
            {"loop_annotations", loops}};
}

}  // namespace

Json number(std::uint64_t n) {
    if (n >= kSafeLimit) return std::to_string(n);
    return n;
}

Json to_json(const detect::AnalysisReport& r) {
    Json blocks = Json::array();
    for (const auto& b : r.blocks) {
        Json critical = Json::array();
        for (const auto& c : b.critical) critical.push_back({{"offset", number(c.offset)}, {"mnemonic", c.mnemonic}});
        blocks.push_back({{"id", number(b.id)},
                          {"start_offset", number(b.start_offset)},
                          {"end_offset", number(b.end_offset)},
                          {"terminator", b.terminator},
                          {"critical_instructions", critical},
                          {"has_critical_opcode", !b.critical.empty()}});
    }
    Json aggregates = Json::array();
    for (const auto& a : r.aggregates) aggregates.push_back(aggregate(a));
    Json slots = Json::array();
    for (const auto& s : r.storage_slots) {
        slots.push_back({{"canonical_key", s.canonical_key},
                         {"kind", s.kind},
                         {"display", s.display},
                         {"data_address", s.data_address},
                         {"read_by", numbers(s.read_by)},
                         {"written_by", numbers(s.written_by)}});
    }
    Json c1 = Json::array();
    for (const auto& e : r.c1.evidence) {
        c1.push_back({{"aggregate", number(e.aggregate)},
                      {"shared_slot", e.shared_slot},
                      {"invest_event", event_ref(e.invest_event)},
                      {"reward_event", event_ref(e.reward_event)}});
    }
    Json c2 = Json::array();
    for (const auto& e : r.c2.evidence) {
        c2.push_back({{"aggregate", number(e.aggregate)}, {"loop_header", number(e.loop_header)}});
    }
    const auto& st = r.stats;
    return {
        {"schema_version", kReportSchemaVersion},
        {"tool_version", r.tool_version},
        {"contract",
         {{"address", r.contract.address},
          {"fixture", r.contract.fixture},
          {"chain", r.contract.chain},
          {"code_hash", r.contract.code_hash},
          {"code_kind", r.contract.code_kind}}},
        {"cfg",
         {{"block_count", number(r.cfg.block_count)},
          {"edge_count", number(r.cfg.edge_count)},
          {"unresolved_jump_count", number(r.cfg.unresolved_jump_count)},
          {"back_edge_count", number(r.cfg.back_edge_count)},
          {"irreducible_edge_count", number(r.cfg.irreducible_edge_count)}}},
        {"blocks", blocks},
        {"aggregates", aggregates},
        {"storage_slots", slots},
        {"c1", {{"satisfied", r.c1.satisfied}, {"evidence", c1}}},
        {"c2", {{"satisfied", r.c2.satisfied}, {"evidence", c2}}},
        {"verdict", std::string{detect::to_string(r.verdict)}},
        {"diagnostics", strings(r.diagnostics)},
        {"bounds",
         {{"max_paths", number(r.bounds.max_paths)},
          {"max_blocks_per_path", number(r.bounds.max_blocks_per_path)},
          {"loop_unroll", number(r.bounds.loop_unroll)}}},
        {"enumeration",
         {{"kept", number(st.kept)},
          {"discarded_revert", number(st.discarded_revert)},
          {"discarded_infeasible", number(st.discarded_infeasible)},
          {"discarded_bad_jump", number(st.discarded_bad_jump)},
          {"discarded_loop_bound", number(st.discarded_loop_bound)},
          {"discarded_length", number(st.discarded_length)},
          {"unresolved_ends", number(st.unresolved_ends)},
          {"loops_without_call", number(st.loops_without_call)},
          {"truncated", st.truncated}}},
        {"meta",
         {{"verdict_is_extension", true},
          {"feasibility", "stack shape and concrete jump targets only; branch conditions are not solved"}}},
    };
}

Json opcodes_json(const cfg::Cfg& cfg) {
    Json blocks = Json::array();
    for (const auto& b : cfg.blocks) {
        Json instrs = Json::array();
        for (const auto& in : b.instructions) {
            Json i = {{"offset", number(in.offset)}, {"mnemonic", std::string{in.mnemonic()}}};
            if (in.immediate) i["immediate_hex"] = bytecode::immediate_hex(in);
            instrs.push_back(std::move(i));
        }
        blocks.push_back({{"id", number(b.id)}, {"start_offset", number(b.start_offset)}, {"instructions", instrs}});
    }
    return {{"blocks", blocks}};
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string serialize(const detect::AnalysisReport& report) { return dump(to_json(report)); }

}  // namespace ponzitrace::report
