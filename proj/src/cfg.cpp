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

#include <ponzitrace/cfg.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <ponzitrace/symexec.hpp>

namespace ponzitrace::cfg {

using bytecode::Instruction;

std::string_view to_string(Terminator t) noexcept {
    switch (t) {
        case Terminator::kJump:
            return "jump";
        case Terminator::kConditionalJump:
            return "conditional_jump";
        case Terminator::kStop:
            return "stop";
        case Terminator::kReturn:
            return "return";
        case Terminator::kRevert:
            return "revert";
        case Terminator::kSelfDestruct:
            return "selfdestruct";
        case Terminator::kInvalid:
            return "invalid";
        case Terminator::kFallthrough:
            return "fallthrough";
    }
    return "stop";
}

std::string_view to_string(EdgeKind k) noexcept {
    switch (k) {
        case EdgeKind::kJump:
            return "jump";
        case EdgeKind::kBranchTaken:
            return "branch_taken";
        case EdgeKind::kBranchFallthrough:
            return "branch_fallthrough";
        case EdgeKind::kFallthrough:
            return "fallthrough";
    }
    return "fallthrough";
}

bool BasicBlock::starts_with_jumpdest() const {
    return !instructions.empty() && instructions.front().opcode == bytecode::op::kJumpdest;
}

bool BasicBlock::is_halting() const noexcept {
    switch (terminator) {
        case Terminator::kStop:
        case Terminator::kReturn:
        case Terminator::kRevert:
        case Terminator::kSelfDestruct:
        case Terminator::kInvalid:
            return true;
        default:
            return false;
    }
}

bool BasicBlock::contains(std::uint8_t opcode) const {
    return std::any_of(instructions.begin(), instructions.end(),
                       [opcode](const Instruction& i) { return i.opcode == opcode; });
}

std::vector<CfgEdge> Cfg::successors(BlockId id) const {
    auto lo = std::lower_bound(edges.begin(), edges.end(), id, [](const CfgEdge& e, BlockId v) { return e.from < v; });
    std::vector<CfgEdge> out;
    for (; lo != edges.end() && lo->from == id; ++lo) out.push_back(*lo);
    return out;
}

std::optional<BlockId> Cfg::block_at(std::size_t offset) const {
    auto it = std::lower_bound(blocks.begin(), blocks.end(), offset,
                               [](const BasicBlock& b, std::size_t off) { return b.start_offset < off; });
    if (it == blocks.end() || it->start_offset != offset) return std::nullopt;
    return it->id;
}

std::vector<bool> Cfg::reachable() const {
    std::vector<bool> seen(blocks.size(), false);
    if (blocks.empty()) return seen;
    std::vector<BlockId> work{entry};
    seen[entry] = true;
    while (!work.empty()) {
        const BlockId b = work.back();
        work.pop_back();
        for (const auto& e : successors(b)) {
            if (!seen[e.to]) {
                seen[e.to] = true;
                work.push_back(e.to);
            }
        }
    }
    return seen;
}

bool Cfg::has_edge(BlockId from, BlockId to) const {
    const auto succ = successors(from);
    return std::any_of(succ.begin(), succ.end(), [to](const CfgEdge& e) { return e.to == to; });
}

namespace {

Terminator classify(const Instruction& last, bool has_next) {
    const auto& spec = last.spec();
    if (spec.is_jump) return Terminator::kJump;
    if (spec.is_conditional_jump) return Terminator::kConditionalJump;
    switch (last.opcode) {
        case bytecode::op::kStop:
            return Terminator::kStop;
        case bytecode::op::kReturn:
            return Terminator::kReturn;
        case bytecode::op::kRevert:
            return Terminator::kRevert;
        case bytecode::op::kSelfDestruct:
            return Terminator::kSelfDestruct;
        default:
            break;
    }
    if (spec.is_terminator) return Terminator::kInvalid;
    return has_next ? Terminator::kFallthrough : Terminator::kStop;
}

}  // namespace

std::vector<BasicBlock> partition_blocks(std::span<const Instruction> instructions) {
    std::vector<BasicBlock> blocks;
    BasicBlock current;
    auto close = [&](bool has_next) {
        if (current.instructions.empty()) return;
        current.id = blocks.size();
        current.start_offset = current.instructions.front().offset;
        current.terminator = classify(current.instructions.back(), has_next);
        blocks.push_back(std::move(current));
        current = BasicBlock{};
    };
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        const auto& ins = instructions[i];
        if (ins.opcode == bytecode::op::kJumpdest) close(true);
        current.instructions.push_back(ins);
        if (ins.spec().is_terminator || ins.spec().is_conditional_jump) close(i + 1 < instructions.size());
    }
    close(false);
    return blocks;
}

namespace {

using AbsStack = std::vector<std::optional<u256>>;

struct Resolver {
    Cfg& cfg;
    const ResolverLimits& limits;
    std::set<std::size_t> jumpdests;
    std::vector<std::vector<AbsStack>> contexts;
    std::deque<std::pair<BlockId, AbsStack>> work;
    std::set<CfgEdge> edges;
    std::set<UnresolvedJump> unresolved;
    std::set<std::string> notes;

    Resolver(Cfg& c, const ResolverLimits& l) : cfg{c}, limits{l}, contexts(c.blocks.size()) {
        for (const auto& b : cfg.blocks) {
            if (b.starts_with_jumpdest()) jumpdests.insert(b.start_offset);
        }
    }

    [[nodiscard]] bool is_jumpdest(const u256& v) const {
        return v < u256(SIZE_MAX) && jumpdests.count(static_cast<std::size_t>(v)) > 0;
    }

    AbsStack abstract(const std::vector<symexec::SymValue>& stack) const {
        AbsStack out;
        out.reserve(stack.size());
        for (const auto& v : stack) {
            if (v.is_concrete() && is_jumpdest(v.value())) {
                out.emplace_back(v.value());
            } else {
                out.emplace_back(std::nullopt);
            }
        }
        return out;
    }

    void propagate(BlockId to, AbsStack stack) {
        auto& ctx = contexts[to];
        if (std::find(ctx.begin(), ctx.end(), stack) != ctx.end()) return;
        if (ctx.size() < limits.max_contexts_per_block) {
            ctx.push_back(stack);
            work.emplace_back(to, std::move(stack));
            return;
        }
        AbsStack& widened = ctx.back();
        if (widened.size() != stack.size()) {
            notes.insert("stack depth mismatch at block " + std::to_string(to) + "; context dropped");
            return;
        }
        AbsStack joined = widened;
        for (std::size_t i = 0; i < joined.size(); ++i) {
            if (joined[i] != stack[i]) joined[i].reset();
        }
        notes.insert("entry contexts widened at block " + std::to_string(to));
        if (joined == widened) return;
        widened = joined;
        work.emplace_back(to, std::move(joined));
    }

    void run() {
        if (cfg.blocks.empty()) return;
        contexts[cfg.entry].push_back({});
        work.emplace_back(cfg.entry, AbsStack{});
        while (!work.empty()) {
            auto [id, abs] = std::move(work.front());
            work.pop_front();
            visit(id, abs);
        }
    }

    void visit(BlockId id, const AbsStack& abs) {
        const BasicBlock& block = cfg.blocks[id];
        symexec::MachineState state;
        state.memory.havoc({});
        state.stack.reserve(abs.size());
        for (std::size_t i = 0; i < abs.size(); ++i) {
            state.stack.push_back(abs[i] ? symexec::SymValue::concrete(*abs[i])
                                         : symexec::SymValue::opaque(i, "ENTRY", {}));
        }
        symexec::run_block_body(state, block);
        if (state.fault) {
            notes.insert(std::string{symexec::to_string(*state.fault)} + " while resolving block " +
                         std::to_string(id));
            return;
        }

        const auto target = symexec::pending_jump_target(state, block);
        if (block.terminator == Terminator::kJump || block.terminator == Terminator::kConditionalJump) {
            if (!target) {
                unresolved.insert({id, "stack underflow at jump"});
                return;
            }
        }
        symexec::finish_block(state, block);
        if (state.fault) return;
        const AbsStack out = abstract(state.stack);

        if (target) {
            const EdgeKind kind = block.terminator == Terminator::kJump ? EdgeKind::kJump : EdgeKind::kBranchTaken;
            if (!target->is_concrete()) {
                unresolved.insert({id, "symbolic jump target"});
            } else if (!is_jumpdest(target->value())) {
                unresolved.insert({id, "invalid jump destination 0x" + to_hex(target->value())});
            } else {
                const BlockId to = *cfg.block_at(static_cast<std::size_t>(target->value()));
                edges.insert({id, to, kind});
                propagate(to, out);
            }
        }
        if ((block.terminator == Terminator::kFallthrough || block.terminator == Terminator::kConditionalJump) &&
            id + 1 < cfg.blocks.size()) {
            propagate(id + 1, out);
        }
    }
};

}  // namespace

std::vector<std::optional<BlockId>> immediate_dominators(const Cfg& cfg) {
    const std::size_t n = cfg.blocks.size();
    std::vector<std::optional<BlockId>> idom(n);
    if (n == 0) return idom;

    // Reverse postorder over reachable blocks.
    std::vector<BlockId> postorder;
    std::vector<int> state(n, 0);
    std::vector<std::pair<BlockId, std::size_t>> stack{{cfg.entry, 0}};
    std::vector<std::vector<BlockId>> succ(n), pred(n);
    for (const auto& e : cfg.edges) {
        if (succ[e.from].empty() || succ[e.from].back() != e.to) succ[e.from].push_back(e.to);
    }
    state[cfg.entry] = 1;
    while (!stack.empty()) {
        auto& [b, i] = stack.back();
        if (i < succ[b].size()) {
            const BlockId s = succ[b][i++];
            if (state[s] == 0) {
                state[s] = 1;
                stack.emplace_back(s, 0);
            }
        } else {
            postorder.push_back(b);
            stack.pop_back();
        }
    }
    std::vector<std::size_t> rpo_index(n, SIZE_MAX);
    for (std::size_t i = 0; i < postorder.size(); ++i) rpo_index[postorder[i]] = postorder.size() - 1 - i;
    for (const auto& e : cfg.edges) {
        if (rpo_index[e.from] != SIZE_MAX) pred[e.to].push_back(e.from);
    }

    auto intersect = [&](BlockId a, BlockId b) {
        while (a != b) {
            while (rpo_index[a] > rpo_index[b]) a = *idom[a];
            while (rpo_index[b] > rpo_index[a]) b = *idom[b];
        }
        return a;
    };

    idom[cfg.entry] = cfg.entry;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
            const BlockId b = *it;
            if (b == cfg.entry) continue;
            std::optional<BlockId> new_idom;
            for (BlockId p : pred[b]) {
                if (!idom[p]) continue;
                new_idom = new_idom ? intersect(p, *new_idom) : p;
            }
            if (new_idom && idom[b] != new_idom) {
                idom[b] = new_idom;
                changed = true;
            }
        }
    }
    return idom;
}

bool dominates(const std::vector<std::optional<BlockId>>& idom, BlockId a, BlockId b) {
    if (b >= idom.size() || !idom[b]) return false;
    while (true) {
        if (a == b) return true;
        const BlockId up = *idom[b];
        if (up == b) return false;
        b = up;
    }
}

namespace {

void compute_back_edges(Cfg& cfg) {
    const std::size_t n = cfg.blocks.size();
    if (n == 0) return;
    const auto idom = immediate_dominators(cfg);

    std::vector<std::vector<BlockId>> succ(n);
    for (const auto& e : cfg.edges) {
        if (succ[e.from].empty() || succ[e.from].back() != e.to) succ[e.from].push_back(e.to);
    }
    std::set<std::pair<BlockId, BlockId>> back, irreducible;
    std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
    std::vector<std::pair<BlockId, std::size_t>> stack{{cfg.entry, 0}};
    color[cfg.entry] = 1;
    while (!stack.empty()) {
        auto& [b, i] = stack.back();
        if (i < succ[b].size()) {
            const BlockId s = succ[b][i++];
            if (color[s] == 1) {
                (dominates(idom, s, b) ? back : irreducible).insert({b, s});
            } else if (color[s] == 0) {
                color[s] = 1;
                stack.emplace_back(s, 0);
            }
        } else {
            color[b] = 2;
            stack.pop_back();
        }
    }
    cfg.back_edges.assign(back.begin(), back.end());
    cfg.irreducible_edges.assign(irreducible.begin(), irreducible.end());
}

}  // namespace

Cfg build_cfg(std::vector<BasicBlock> blocks, const ResolverLimits& limits) {
    Cfg cfg;
    cfg.blocks = std::move(blocks);
    cfg.entry = 0;
    if (cfg.blocks.empty()) return cfg;

    Resolver resolver{cfg, limits};
    for (const auto& b : cfg.blocks) {
        if (b.id + 1 >= cfg.blocks.size()) continue;
        if (b.terminator == Terminator::kFallthrough) resolver.edges.insert({b.id, b.id + 1, EdgeKind::kFallthrough});
        if (b.terminator == Terminator::kConditionalJump) {
            resolver.edges.insert({b.id, b.id + 1, EdgeKind::kBranchFallthrough});
        }
    }
    resolver.run();

    cfg.edges.assign(resolver.edges.begin(), resolver.edges.end());
    cfg.unresolved_jumps.assign(resolver.unresolved.begin(), resolver.unresolved.end());
    cfg.diagnostics.assign(resolver.notes.begin(), resolver.notes.end());
    compute_back_edges(cfg);
    return cfg;
}

std::vector<std::pair<BlockId, BlockId>> find_back_edges(const Cfg& cfg) { return cfg.back_edges; }

std::vector<BlockId> natural_loop(const Cfg& cfg, BlockId from, BlockId header) {
    const auto reach = cfg.reachable();
    std::vector<std::vector<BlockId>> pred(cfg.blocks.size());
    for (const auto& e : cfg.edges) {
        if (reach[e.from]) pred[e.to].push_back(e.from);
    }
    std::set<BlockId> body{header};
    std::vector<BlockId> work;
    if (from != header) work.push_back(from);
    while (!work.empty()) {
        const BlockId b = work.back();
        work.pop_back();
        if (!body.insert(b).second) continue;
        for (BlockId p : pred[b]) work.push_back(p);
    }
    return {body.begin(), body.end()};
}

Cfg build_cfg_from_code(const bytecode::Bytecode& code, const ResolverLimits& limits) {
    const auto instructions = bytecode::disassemble(code);
    return build_cfg(partition_blocks(instructions), limits);
}

}  // namespace ponzitrace::cfg
