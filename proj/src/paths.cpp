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

#include <ponzitrace/paths.hpp>

#include <algorithm>
#include <map>

namespace ponzitrace::paths {

using symexec::MachineState;
using symexec::PathEnd;

namespace {

struct Loop {
    BlockId from;
    BlockId header;
    std::vector<BlockId> body;
    bool contains_call;
};

std::vector<Loop> natural_loops(const cfg::Cfg& cfg) {
    std::vector<Loop> loops;
    for (const auto& [from, header] : cfg.back_edges) {
        Loop l{from, header, cfg::natural_loop(cfg, from, header), false};
        l.contains_call = std::any_of(l.body.begin(), l.body.end(),
                                      [&](BlockId b) { return cfg.blocks[b].contains(bytecode::op::kCall); });
        loops.push_back(std::move(l));
    }
    return loops;
}

std::vector<LoopAnnotation> annotate(const std::vector<Loop>& loops, const std::vector<BlockId>& blocks) {
    std::vector<LoopAnnotation> out;
    const std::set<BlockId> on_path(blocks.begin(), blocks.end());
    for (const auto& l : loops) {
        const bool touches = std::any_of(l.body.begin(), l.body.end(), [&](BlockId b) { return on_path.count(b) > 0; });
        if (!touches) continue;
        std::size_t used = 0;
        for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
            if (blocks[i] == l.from && blocks[i + 1] == l.header) ++used;
        }
        out.push_back(LoopAnnotation{l.header, l.body, l.contains_call, used});
    }
    return out;
}

class Enumerator {
  public:
    Enumerator(const cfg::Cfg& cfg, const Bounds& bounds)
        : cfg_{cfg}, bounds_{bounds}, loops_{natural_loops(cfg)},
          back_edges_(cfg.back_edges.begin(), cfg.back_edges.end()) {}

    Enumeration run() {
        if (!cfg_.blocks.empty()) {
            std::vector<BlockId> path;
            std::map<std::pair<BlockId, BlockId>, std::size_t> taken;
            visit(cfg_.entry, MachineState{}, path, taken);
        }
        finish();
        return std::move(result_);
    }

  private:
    bool full() {
        if (result_.paths.size() >= bounds_.max_paths) {
            result_.stats.truncated = true;
            return true;
        }
        return false;
    }

    void visit(BlockId id, MachineState state, std::vector<BlockId>& path,
               std::map<std::pair<BlockId, BlockId>, std::size_t>& taken) {
        if (full()) return;
        const auto& block = cfg_.blocks[id];
        path.push_back(id);
        symexec::run_block_body(state, block);

        if (state.fault) {
            ++result_.stats.discarded_infeasible;
            path.pop_back();
            return;
        }

        std::vector<cfg::CfgEdge> next;
        bool any_consistent = false;
        for (const auto& e : cfg_.successors(id)) {
            if (!symexec::edge_consistent(state, cfg_, e)) continue;
            any_consistent = true;
            if (std::any_of(next.begin(), next.end(), [&](const cfg::CfgEdge& n) { return n.to == e.to; })) continue;
            const auto key = std::make_pair(e.from, e.to);
            if (back_edges_.count(key) && taken[key] >= bounds_.loop_unroll) continue;
            next.push_back(e);
        }

        if (!any_consistent) {
            finish_path(state, block, path);
        } else if (next.empty()) {
            ++result_.stats.discarded_loop_bound;
        } else if (path.size() >= bounds_.max_blocks_per_path) {
            ++result_.stats.discarded_length;
        } else {
            symexec::finish_block(state, block);
            if (state.fault) {
                ++result_.stats.discarded_infeasible;
            } else {
                for (std::size_t i = 0; i < next.size(); ++i) {
                    const auto key = std::make_pair(next[i].from, next[i].to);
                    const bool back = back_edges_.count(key) > 0;
                    if (back) ++taken[key];
                    if (i + 1 == next.size()) {
                        visit(next[i].to, std::move(state), path, taken);
                    } else {
                        visit(next[i].to, state, path, taken);
                    }
                    if (back) --taken[key];
                    if (full()) break;
                }
            }
        }
        path.pop_back();
    }

    void finish_path(MachineState& state, const cfg::BasicBlock& last, const std::vector<BlockId>& path) {
        const PathEnd end = symexec::classify_end(state, cfg_, last);
        symexec::finish_block(state, last);
        switch (end) {
            case PathEnd::kRevert:
                ++result_.stats.discarded_revert;
                return;
            case PathEnd::kBadJump:
                ++result_.stats.discarded_bad_jump;
                return;
            case PathEnd::kUnresolved:
                ++result_.stats.unresolved_ends;
                break;
            default:
                break;
        }
        if (state.fault) {
            ++result_.stats.discarded_infeasible;
            return;
        }
        ExecutionPath p;
        p.blocks = path;
        p.effects = symexec::collect_effects(state);
        p.effects.end = end;
        std::tie(p.is_investing, p.is_rewarding) = classify_path(p);
        for (auto& a : annotate(loops_, p.blocks)) {
            if (a.contains_call && p.is_rewarding) {
                p.loop_annotations.push_back(std::move(a));
            } else if (!a.contains_call) {
                loops_without_call_.insert(a.header);
            }
        }
        result_.paths.push_back(std::move(p));
    }

    void finish() {
        auto& s = result_.stats;
        s.kept = result_.paths.size();
        s.loops_without_call = loops_without_call_.size();
        auto note = [&](std::size_t n, const std::string& what) {
            if (n > 0) result_.diagnostics.push_back(std::to_string(n) + " " + what);
        };
        note(s.discarded_revert, "paths discarded: end in REVERT/INVALID");
        note(s.discarded_infeasible, "paths discarded: stack-shape infeasible");
        note(s.discarded_bad_jump, "paths discarded: jump to non-JUMPDEST");
        note(s.discarded_loop_bound, "paths discarded: only over-bound back edges left");
        note(s.discarded_length, "paths discarded: exceeded max blocks per path");
        note(s.unresolved_ends, "paths end at an unresolved jump");
        note(s.loops_without_call, "loops without CALL (not used for loop evidence)");
        if (s.truncated) {
            result_.diagnostics.push_back("path enumeration truncated at max_paths=" + std::to_string(bounds_.max_paths));
        }
    }

    const cfg::Cfg& cfg_;
    const Bounds& bounds_;
    std::vector<Loop> loops_;
    std::set<std::pair<BlockId, BlockId>> back_edges_;
    std::set<BlockId> loops_without_call_;
    Enumeration result_;
};

EffectDescriptor describe(const symexec::InvestEvent& e) {
    return {"SSTORE", {e.slot.canonical_key()}, e.stored_value.taint().names()};
}

EffectDescriptor describe(const symexec::RewardEvent& e) {
    std::vector<std::string> keys;
    for (const auto& s : e.target_slots) keys.push_back(s.canonical_key());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return {"CALL", std::move(keys), e.target.taint().names()};
}

}  // namespace

std::string PathSignature::render() const {
    std::string out;
    for (const auto& e : effects) {
        if (!out.empty()) out += "; ";
        out += e.mnemonic + "[";
        for (std::size_t i = 0; i < e.slots.size(); ++i) out += (i ? "," : "") + e.slots[i];
        out += "]{";
        for (std::size_t i = 0; i < e.taint.size(); ++i) out += (i ? "," : "") + e.taint[i];
        out += "}";
    }
    return out;
}

Enumeration enumerate_paths(const cfg::Cfg& cfg, const Bounds& bounds) { return Enumerator{cfg, bounds}.run(); }

std::pair<bool, bool> classify_path(const ExecutionPath& path) {
    return {!path.effects.invest_events.empty(), !path.effects.reward_events.empty()};
}

std::vector<LoopAnnotation> detect_call_loops(const cfg::Cfg& cfg, const ExecutionPath& path) {
    return annotate(natural_loops(cfg), path.blocks);
}

PathSignature signature_of(const symexec::PathEffects& effects) {
    std::vector<std::pair<std::size_t, EffectDescriptor>> ordered;
    for (const auto& e : effects.invest_events) ordered.emplace_back(e.seq, describe(e));
    for (const auto& e : effects.reward_events) ordered.emplace_back(e.seq, describe(e));
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PathSignature sig;
    for (auto& [seq, d] : ordered) sig.effects.push_back(std::move(d));
    return sig;
}

std::vector<AggregatedPath> aggregate_paths(const std::vector<ExecutionPath>& paths) {
    std::vector<AggregatedPath> out;
    std::map<PathSignature, std::size_t> by_signature;
    for (const auto& p : paths) {
        if (!p.is_investing && !p.is_rewarding) continue;
        PathSignature sig = signature_of(p.effects);
        auto [it, inserted] = by_signature.try_emplace(sig, out.size());
        if (inserted) {
            AggregatedPath a;
            a.index = out.size();
            a.signature = std::move(sig);
            a.is_investing = p.is_investing;
            a.is_rewarding = p.is_rewarding;
            out.push_back(std::move(a));
        }
        AggregatedPath& agg = out[it->second];
        agg.union_blocks.insert(p.blocks.begin(), p.blocks.end());
        for (std::size_t i = 0; i + 1 < p.blocks.size(); ++i) agg.union_edges.emplace(p.blocks[i], p.blocks[i + 1]);
        for (const auto& e : p.effects.invest_events) agg.slots_written.insert(e.slot.canonical_key());
        for (const auto& e : p.effects.reward_events) {
            for (const auto& s : e.target_slots) agg.slots_read.insert(s.canonical_key());
        }
        for (const auto& l : p.loop_annotations) {
            auto same = std::find_if(agg.loop_annotations.begin(), agg.loop_annotations.end(),
                                     [&](const LoopAnnotation& x) { return x.header == l.header && x.body == l.body; });
            if (same == agg.loop_annotations.end()) {
                agg.loop_annotations.push_back(l);
            } else {
                same->unroll_count_used = std::max(same->unroll_count_used, l.unroll_count_used);
            }
        }
        agg.member_paths.push_back(p);
    }
    for (auto& a : out) {
        std::sort(a.loop_annotations.begin(), a.loop_annotations.end(),
                  [](const LoopAnnotation& x, const LoopAnnotation& y) { return x.header < y.header; });
    }
    return out;
}

}  // namespace ponzitrace::paths
