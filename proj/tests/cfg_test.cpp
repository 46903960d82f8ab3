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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include <ponzitrace/cfg.hpp>

#include "support.hpp"

namespace ponzitrace::cfg {
namespace {

using Edge = std::pair<BlockId, BlockId>;

std::set<Edge> edge_pairs(const Cfg& g) {
    std::set<Edge> out;
    for (const auto& e : g.edges) out.emplace(e.from, e.to);
    return out;
}

Cfg from_hex(std::string_view hex) { return build_cfg_from_code(bytecode::parse_hex(hex)); }

TEST(Partition, JumpOverStop) {
    const auto g = from_hex("600456005b00");
    ASSERT_EQ(g.blocks.size(), 3u);
    EXPECT_EQ(g.blocks[0].start_offset, 0u);
    EXPECT_EQ(g.blocks[1].start_offset, 3u);
    EXPECT_EQ(g.blocks[2].start_offset, 4u);
    EXPECT_EQ(g.blocks[0].terminator, Terminator::kJump);
    EXPECT_EQ(g.blocks[1].terminator, Terminator::kStop);
    EXPECT_EQ(edge_pairs(g), (std::set<Edge>{{0, 2}}));
    EXPECT_EQ(g.reachable(), (std::vector<bool>{true, false, true}));
    EXPECT_TRUE(g.unresolved_jumps.empty());
}

TEST(Partition, ConditionalJump) {
    const auto g = from_hex("6001600657005b00");
    ASSERT_EQ(g.blocks.size(), 3u);
    EXPECT_EQ(g.blocks[0].terminator, Terminator::kConditionalJump);
    ASSERT_EQ(g.edges.size(), 2u);
    EXPECT_TRUE(g.has_edge(0, 1));
    EXPECT_TRUE(g.has_edge(0, 2));
    for (const auto& e : g.edges) {
        EXPECT_EQ(e.kind, e.to == 1 ? EdgeKind::kBranchFallthrough : EdgeKind::kBranchTaken);
    }
}

TEST(Partition, SingleStop) {
    const auto g = from_hex("00");
    ASSERT_EQ(g.blocks.size(), 1u);
    EXPECT_TRUE(g.edges.empty());
    EXPECT_TRUE(g.back_edges.empty());
}

TEST(Partition, RunOffEndIsImplicitStop) {
    const auto g = from_hex("60016002");
    ASSERT_EQ(g.blocks.size(), 1u);
    EXPECT_EQ(g.blocks[0].terminator, Terminator::kStop);
    EXPECT_TRUE(g.blocks[0].is_halting());
}

TEST(Partition, JumpdestInsidePushDataIsNotATarget) {
    // PUSH1 0x5b hides a 0x5b byte; jumping to offset 1 is invalid.
    const auto g = from_hex("605b50600156");
    ASSERT_EQ(g.blocks.size(), 1u);
    ASSERT_EQ(g.unresolved_jumps.size(), 1u);
    EXPECT_NE(g.unresolved_jumps[0].reason.find("invalid jump destination"), std::string::npos);
}

TEST(Partition, SymbolicJumpIsUnresolved) {
    const auto g = from_hex("60003556");
    ASSERT_EQ(g.unresolved_jumps.size(), 1u);
    EXPECT_EQ(g.unresolved_jumps[0].reason, "symbolic jump target");
}

TEST(Resolver, ReturnAddressThroughStack) {
    // Caller pushes the return label, jumps to a shared routine which
    // returns with a plain JUMP.
    const auto g = build_cfg_from_code(test::assemble(
        "PUSH1 :ret1 PUSH1 :sub JUMP "
        "@ret1 JUMPDEST PUSH1 :ret2 PUSH1 :sub JUMP "
        "@ret2 JUMPDEST STOP "
        "@sub JUMPDEST JUMP"));
    ASSERT_EQ(g.blocks.size(), 4u);
    EXPECT_TRUE(g.unresolved_jumps.empty());
    EXPECT_EQ(edge_pairs(g), (std::set<Edge>{{0, 3}, {1, 3}, {3, 1}, {3, 2}}));
}

TEST(Dominators, DiamondAndLoop) {
    // 0 -> {1, 2} -> 3 -> loop back to 3 via 4
    const auto g = build_cfg_from_code(test::assemble(
        "CALLVALUE PUSH1 :b2 JUMPI "
        "PUSH1 :b3 JUMP "
        "@b2 JUMPDEST "
        "@b3 JUMPDEST CALLER PUSH1 :b3 JUMPI STOP"));
    const auto idom = immediate_dominators(g);
    ASSERT_EQ(g.blocks.size(), 5u);
    EXPECT_EQ(idom[0], BlockId{0});
    EXPECT_EQ(idom[1], BlockId{0});
    EXPECT_EQ(idom[2], BlockId{0});
    EXPECT_EQ(idom[3], BlockId{0});
    EXPECT_EQ(idom[4], BlockId{3});
    EXPECT_TRUE(dominates(idom, 3, 4));
    EXPECT_FALSE(dominates(idom, 1, 3));
    EXPECT_EQ(g.back_edges, (std::vector<Edge>{{3, 3}}));
    EXPECT_EQ(natural_loop(g, 3, 3), (std::vector<BlockId>{3}));
}

TEST(Dominators, NaturalLoopBody) {
    const auto g = build_cfg_from_code(test::assemble(
        "@h JUMPDEST CALLVALUE PUSH1 :out JUMPI "
        "CALLER PUSH1 :skip JUMPI "
        "PUSH1 0x00 POP "
        "@skip JUMPDEST PUSH1 :h JUMP "
        "@out JUMPDEST STOP"));
    ASSERT_EQ(g.back_edges.size(), 1u);
    const auto [from, header] = g.back_edges[0];
    EXPECT_EQ(header, 0u);
    EXPECT_EQ(natural_loop(g, from, header), (std::vector<BlockId>{0, 1, 2, 3}));
}

TEST(Dominators, IrreducibleEdgeIsNotABackEdge) {
    // Two entries into the cycle a <-> b.
    const auto g = build_cfg_from_code(test::assemble(
        "CALLVALUE PUSH1 :b JUMPI "
        "@a JUMPDEST CALLER PUSH1 :out JUMPI PUSH1 :b JUMP "
        "@b JUMPDEST PUSH1 :a JUMP "
        "@out JUMPDEST STOP"));
    EXPECT_TRUE(g.back_edges.empty());
    EXPECT_EQ(g.irreducible_edges.size(), 1u);
}

// ---------------------------------------------------------------------------
// random bytecode: partition and edge invariants

void check_invariants(const Cfg& g, std::span<const bytecode::Instruction> ins) {
    std::size_t k = 0;
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        const auto& block = g.blocks[b];
        ASSERT_EQ(block.id, b);
        ASSERT_FALSE(block.instructions.empty());
        EXPECT_EQ(block.start_offset, block.instructions.front().offset);
        for (std::size_t i = 0; i < block.instructions.size(); ++i, ++k) {
            ASSERT_LT(k, ins.size());
            EXPECT_EQ(block.instructions[i].offset, ins[k].offset);
            const auto& spec = block.instructions[i].spec();
            const bool last = i + 1 == block.instructions.size();
            if (i > 0) EXPECT_NE(block.instructions[i].opcode, bytecode::op::kJumpdest);
            if (!last) EXPECT_FALSE(spec.is_terminator || spec.is_conditional_jump);
        }
        if (b + 1 < g.blocks.size()) {
            const auto& last = block.last().spec();
            EXPECT_TRUE(last.is_terminator || last.is_conditional_jump ||
                        g.blocks[b + 1].instructions.front().opcode == bytecode::op::kJumpdest);
        }
    }
    EXPECT_EQ(k, ins.size());
    EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end()));
    for (const auto& e : g.edges) {
        ASSERT_LT(e.to, g.blocks.size());
        const auto t = g.blocks[e.from].terminator;
        switch (e.kind) {
            case EdgeKind::kJump:
                EXPECT_EQ(t, Terminator::kJump);
                EXPECT_TRUE(g.blocks[e.to].starts_with_jumpdest());
                break;
            case EdgeKind::kBranchTaken:
                EXPECT_EQ(t, Terminator::kConditionalJump);
                EXPECT_TRUE(g.blocks[e.to].starts_with_jumpdest());
                break;
            case EdgeKind::kBranchFallthrough:
                EXPECT_EQ(t, Terminator::kConditionalJump);
                EXPECT_EQ(e.to, e.from + 1);
                break;
            case EdgeKind::kFallthrough:
                EXPECT_EQ(t, Terminator::kFallthrough);
                EXPECT_EQ(e.to, e.from + 1);
                break;
        }
    }
    for (const auto& b : g.blocks) {
        if (b.is_halting()) EXPECT_TRUE(g.successors(b.id).empty());
    }
}

TEST(RandomBytecode, PartitionAndEdgeInvariants) {
    std::mt19937 rng{7};
    const std::vector<std::uint8_t> common{0x00, 0x56, 0x57, 0x5b, 0x5b, 0x60, 0x60, 0x61, 0x01,
                                           0x33, 0x34, 0x50, 0x80, 0x90, 0xf3, 0xfd, 0xfe};
    for (int round = 0; round < 200; ++round) {
        std::vector<std::uint8_t> bytes(1 + rng() % 80);
        for (auto& b : bytes) b = rng() % 3 == 0 ? static_cast<std::uint8_t>(rng()) : common[rng() % common.size()];
        const bytecode::Bytecode code{bytes, bytecode::Source::kInline};
        const auto ins = bytecode::disassemble(code);
        const auto g = build_cfg_from_code(code);
        SCOPED_TRACE("round " + std::to_string(round));
        check_invariants(g, ins);
    }
}

// ---------------------------------------------------------------------------
// generated programs with a known intended graph

struct Generated {
    std::string text;
    std::size_t n{0};
    std::set<Edge> static_edges;      // fallthrough edges, present regardless of reachability
    std::vector<std::set<BlockId>> jumps;  // intended jump targets per block
};

Generated generate(std::mt19937& rng) {
    Generated out;
    out.n = 2 + rng() % 7;
    out.jumps.resize(out.n);
    for (std::size_t i = 0; i < out.n; ++i) {
        out.text += "@b" + std::to_string(i) + " JUMPDEST ";
        for (unsigned f = rng() % 3; f > 0; --f) out.text += rng() % 2 ? "CALLER POP " : "PUSH1 0x2a POP ";
        const bool last = i + 1 == out.n;
        const std::string target = "b" + std::to_string(rng() % out.n);
        const BlockId t = std::stoul(target.substr(1));
        switch (rng() % 4) {
            case 0:
                out.text += "STOP ";
                break;
            case 1:
                out.text += "PUSH1 :" + target + " JUMP ";
                out.jumps[i].insert(t);
                break;
            case 2:
                out.text += "CALLVALUE PUSH1 :" + target + " JUMPI ";
                out.jumps[i].insert(t);
                if (!last) out.static_edges.emplace(i, i + 1);
                break;
            default:
                if (!last) out.static_edges.emplace(i, i + 1);
                break;
        }
    }
    return out;
}

std::vector<bool> brute_reach(std::size_t n, const std::set<Edge>& edges, std::optional<BlockId> removed) {
    std::vector<bool> seen(n, false);
    if (removed == BlockId{0}) return seen;
    std::vector<BlockId> work{0};
    seen[0] = true;
    while (!work.empty()) {
        const BlockId b = work.back();
        work.pop_back();
        for (const auto& [from, to] : edges) {
            if (from != b || seen[to] || removed == to) continue;
            seen[to] = true;
            work.push_back(to);
        }
    }
    return seen;
}

TEST(GeneratedPrograms, EdgesAndDominanceMatchBruteForce) {
    std::mt19937 rng{99};
    for (int round = 0; round < 300; ++round) {
        const auto gen = generate(rng);
        SCOPED_TRACE(gen.text);
        const auto g = build_cfg_from_code(test::assemble(gen.text));
        ASSERT_EQ(g.blocks.size(), gen.n);
        EXPECT_TRUE(g.unresolved_jumps.empty());

        // Intended graph: fallthroughs everywhere, jumps from reachable blocks.
        std::set<Edge> all = gen.static_edges;
        for (std::size_t i = 0; i < gen.n; ++i) {
            for (BlockId t : gen.jumps[i]) all.emplace(i, t);
        }
        const auto reach = brute_reach(gen.n, all, std::nullopt);
        std::set<Edge> intended = gen.static_edges;
        for (std::size_t i = 0; i < gen.n; ++i) {
            if (!reach[i]) continue;
            for (BlockId t : gen.jumps[i]) intended.emplace(i, t);
        }
        EXPECT_EQ(edge_pairs(g), intended);
        EXPECT_EQ(g.reachable(), reach);

        // a dominates b iff removing a cuts b off from the entry.
        std::vector<std::vector<bool>> dom(gen.n, std::vector<bool>(gen.n, false));
        for (std::size_t a = 0; a < gen.n; ++a) {
            const auto without = brute_reach(gen.n, intended, a);
            for (std::size_t b = 0; b < gen.n; ++b) dom[a][b] = reach[b] && (a == b || !without[b]);
        }
        const auto idom = immediate_dominators(g);
        for (std::size_t b = 0; b < gen.n; ++b) {
            if (!reach[b]) {
                EXPECT_FALSE(idom[b].has_value());
                continue;
            }
            for (std::size_t a = 0; a < gen.n; ++a) {
                if (reach[a]) EXPECT_EQ(dominates(idom, a, b), dom[a][b]) << a << " dom " << b;
            }
        }

        std::set<Edge> back;
        for (const auto& [u, v] : intended) {
            if (reach[u] && dom[v][u]) back.emplace(u, v);
        }
        EXPECT_EQ(std::set<Edge>(g.back_edges.begin(), g.back_edges.end()), back);
        for (const auto& [u, v] : g.irreducible_edges) {
            EXPECT_FALSE(dom[v][u]);
            EXPECT_TRUE(intended.count({u, v}));
        }
        for (const auto& [u, v] : g.back_edges) {
            const auto body = natural_loop(g, u, v);
            for (BlockId x : body) EXPECT_TRUE(dom[v][x]) << "header must dominate loop body";
            EXPECT_TRUE(std::binary_search(body.begin(), body.end(), u));
        }
    }
}

TEST(Fixtures, AllJumpsResolvedAndEntryReachable) {
    for (const char* name : {"scenario1", "scenario2", "micro_ponzi", "micro_invest", "micro_reward",
                             "loop_without_call"}) {
        SCOPED_TRACE(name);
        const auto code = test::fixture_code(name);
        const auto g = build_cfg_from_code(code);
        check_invariants(g, bytecode::disassemble(code));
        EXPECT_TRUE(g.unresolved_jumps.empty());
        EXPECT_TRUE(g.irreducible_edges.empty());
        EXPECT_TRUE(g.reachable()[0]);
    }
}

TEST(Fixtures, Scenario1Shape) {
    const auto g = build_cfg_from_code(test::fixture_code("scenario1"));
    EXPECT_EQ(g.blocks.size(), 57u);
    EXPECT_EQ(g.back_edges.size(), 1u);
}

TEST(Fixtures, MicroPonziLoop) {
    const auto g = build_cfg_from_code(test::fixture_code("micro_ponzi"));
    ASSERT_EQ(g.back_edges.size(), 1u);
    const auto body = natural_loop(g, g.back_edges[0].first, g.back_edges[0].second);
    EXPECT_TRUE(std::any_of(body.begin(), body.end(),
                            [&](BlockId b) { return g.blocks[b].contains(bytecode::op::kCall); }));
}

}  // namespace
}  // namespace ponzitrace::cfg
