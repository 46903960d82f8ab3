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
#include <map>
#include <random>

#include <ponzitrace/paths.hpp>

#include "support.hpp"

namespace ponzitrace::paths {
namespace {

using Seq = std::vector<BlockId>;

std::vector<Seq> block_lists(const Enumeration& e) {
    std::vector<Seq> out;
    for (const auto& p : e.paths) out.push_back(p.blocks);
    return out;
}

Enumeration enumerate(std::string_view program, const Bounds& bounds = {}) {
    return enumerate_paths(cfg::build_cfg_from_code(test::assemble(program)), bounds);
}

TEST(Enumerate, Diamond) {
    const auto e = enumerate(
        "CALLVALUE PUSH1 :right JUMPI "
        "PUSH1 :join JUMP "
        "@right JUMPDEST "
        "@join JUMPDEST STOP");
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 1, 3}, {0, 2, 3}}));
    EXPECT_EQ(e.stats.kept, 2u);
}

TEST(Enumerate, SelfLoopUnrolledOnce) {
    const auto e = enumerate("@top JUMPDEST CALLVALUE PUSH1 :top JUMPI STOP");
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 0, 1}, {0, 1}}));
}

TEST(Enumerate, SelfLoopUnrolledTwice) {
    Bounds b;
    b.loop_unroll = 2;
    const auto e = enumerate("@top JUMPDEST CALLVALUE PUSH1 :top JUMPI STOP", b);
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 0, 0, 1}, {0, 0, 1}, {0, 1}}));
}

TEST(Enumerate, RevertPathsAreDiscarded) {
    const auto e = enumerate("CALLVALUE PUSH1 :ok JUMPI PUSH1 0x00 DUP1 REVERT @ok JUMPDEST STOP");
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 2}}));
    EXPECT_EQ(e.stats.discarded_revert, 1u);
    EXPECT_FALSE(e.diagnostics.empty());
}

TEST(Enumerate, InvalidOpcodeIsDiscarded) {
    const auto e = enumerate("CALLVALUE PUSH1 :ok JUMPI INVALID @ok JUMPDEST STOP");
    EXPECT_EQ(e.stats.kept, 1u);
    EXPECT_EQ(e.stats.discarded_revert, 1u);
}

TEST(Enumerate, InfiniteLoopHasNoKeptPath) {
    const auto e = enumerate("@top JUMPDEST PUSH1 :top JUMP");
    EXPECT_TRUE(e.paths.empty());
    EXPECT_EQ(e.stats.discarded_loop_bound, 1u);
}

TEST(Enumerate, MaxPathsTruncates) {
    Bounds b;
    b.max_paths = 1;
    const auto e = enumerate(
        "CALLVALUE PUSH1 :right JUMPI PUSH1 :join JUMP @right JUMPDEST @join JUMPDEST STOP", b);
    EXPECT_EQ(e.paths.size(), 1u);
    EXPECT_TRUE(e.stats.truncated);
    EXPECT_TRUE(std::any_of(e.diagnostics.begin(), e.diagnostics.end(),
                            [](const std::string& d) { return d.find("truncated") != std::string::npos; }));
}

TEST(Enumerate, MaxBlocksDiscardsLongPaths) {
    Bounds b;
    b.max_blocks_per_path = 2;
    const auto e = enumerate("@top JUMPDEST CALLVALUE PUSH1 :top JUMPI STOP", b);
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 1}}));
    EXPECT_EQ(e.stats.discarded_length, 1u);
}

TEST(Enumerate, ConcreteConditionPrunesInconsistentBranch) {
    // The returned-to block is fixed by the pushed return address.
    const auto e = enumerate(
        "PUSH1 :r1 PUSH1 :sub JUMP "
        "@r1 JUMPDEST STOP "
        "@r2 JUMPDEST STOP "
        "@sub JUMPDEST JUMP "
        "PUSH1 :r2 PUSH1 :sub JUMP");
    EXPECT_EQ(block_lists(e), (std::vector<Seq>{{0, 3, 1}}));
}

// ---------------------------------------------------------------------------
// brute-force oracle over generated programs

struct Program {
    std::string text;
    std::size_t n{0};
    std::vector<std::set<BlockId>> succ;
};

Program generate(std::mt19937& rng) {
    Program p;
    p.n = 2 + rng() % 7;
    p.succ.resize(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        p.text += "@b" + std::to_string(i) + " JUMPDEST ";
        const bool last = i + 1 == p.n;
        const BlockId t = rng() % p.n;
        const std::string label = ":b" + std::to_string(t);
        switch (rng() % 4) {
            case 0:
                p.text += "STOP ";
                break;
            case 1:
                p.text += "PUSH1 " + label + " JUMP ";
                p.succ[i].insert(t);
                break;
            case 2:
                p.text += "CALLVALUE PUSH1 " + label + " JUMPI ";
                p.succ[i].insert(t);
                if (!last) p.succ[i].insert(i + 1);
                break;
            default:
                if (!last) p.succ[i].insert(i + 1);
                break;
        }
    }
    return p;
}

std::vector<std::vector<bool>> brute_dominance(const Program& p) {
    auto reach_without = [&](std::optional<BlockId> removed) {
        std::vector<bool> seen(p.n, false);
        if (removed == BlockId{0}) return seen;
        std::vector<BlockId> work{0};
        seen[0] = true;
        while (!work.empty()) {
            const BlockId b = work.back();
            work.pop_back();
            for (BlockId t : p.succ[b]) {
                if (seen[t] || removed == t) continue;
                seen[t] = true;
                work.push_back(t);
            }
        }
        return seen;
    };
    const auto reach = reach_without(std::nullopt);
    std::vector<std::vector<bool>> dom(p.n, std::vector<bool>(p.n));
    for (std::size_t a = 0; a < p.n; ++a) {
        const auto w = reach_without(a);
        for (std::size_t b = 0; b < p.n; ++b) dom[a][b] = reach[b] && (a == b || !w[b]);
    }
    return dom;
}

void brute_paths(const Program& p, const std::vector<std::vector<bool>>& dom, const Bounds& bounds, Seq& path,
                 std::map<std::pair<BlockId, BlockId>, std::size_t>& used, std::vector<Seq>& out) {
    if (out.size() > bounds.max_paths) return;
    const BlockId b = path.back();
    if (p.succ[b].empty()) {
        out.push_back(path);
        return;
    }
    if (path.size() >= bounds.max_blocks_per_path) return;
    for (BlockId t : p.succ[b]) {
        const bool back = dom[t][b];
        if (back && used[{b, t}] >= bounds.loop_unroll) continue;
        if (back) ++used[{b, t}];
        path.push_back(t);
        brute_paths(p, dom, bounds, path, used, out);
        path.pop_back();
        if (back) --used[{b, t}];
    }
}

TEST(EnumerateProperty, MatchesBruteForceOracle) {
    std::mt19937 rng{1234};
    for (int round = 0; round < 400; ++round) {
        const auto prog = generate(rng);
        SCOPED_TRACE(prog.text);
        Bounds bounds;
        bounds.loop_unroll = 1 + rng() % 2;
        bounds.max_blocks_per_path = 24;
        bounds.max_paths = 512;
        const auto dom = brute_dominance(prog);
        std::vector<Seq> expected;
        Seq start{0};
        std::map<std::pair<BlockId, BlockId>, std::size_t> used;
        brute_paths(prog, dom, bounds, start, used, expected);

        const auto g = cfg::build_cfg_from_code(test::assemble(prog.text));
        const auto e = enumerate_paths(g, bounds);
        // Irreducible cycles are bounded only by path length, so the oracle
        // also stops one past max_paths.
        if (expected.size() > bounds.max_paths) {
            EXPECT_TRUE(e.stats.truncated);
            expected.resize(bounds.max_paths);
        }
        EXPECT_EQ(block_lists(e), expected);

        for (const auto& path : e.paths) {
            EXPECT_EQ(path.blocks.front(), g.entry);
            for (std::size_t i = 0; i + 1 < path.blocks.size(); ++i) {
                EXPECT_TRUE(g.has_edge(path.blocks[i], path.blocks[i + 1]));
            }
            for (const auto& [from, to] : g.back_edges) {
                std::size_t n = 0;
                for (std::size_t i = 0; i + 1 < path.blocks.size(); ++i) {
                    n += path.blocks[i] == from && path.blocks[i + 1] == to;
                }
                EXPECT_LE(n, bounds.loop_unroll);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// classification, loops and aggregation on fixtures

Enumeration fixture_paths(std::string_view name) {
    return enumerate_paths(cfg::build_cfg_from_code(test::fixture_code(name)));
}

TEST(Classify, MicroFixtures) {
    const auto invest = fixture_paths("micro_invest");
    ASSERT_EQ(invest.paths.size(), 1u);
    EXPECT_EQ(classify_path(invest.paths[0]), std::make_pair(true, false));

    const auto reward = fixture_paths("micro_reward");
    ASSERT_EQ(reward.paths.size(), 1u);
    EXPECT_EQ(classify_path(reward.paths[0]), std::make_pair(false, true));

    const auto none = enumerate("PUSH1 0x01 PUSH1 0x02 ADD STOP");
    ASSERT_EQ(none.paths.size(), 1u);
    EXPECT_EQ(classify_path(none.paths[0]), std::make_pair(false, false));
    EXPECT_TRUE(aggregate_paths(none.paths).empty());
}

TEST(Loops, CallLoopAnnotatedOnRewardingPaths) {
    const auto g = cfg::build_cfg_from_code(test::fixture_code("micro_ponzi"));
    const auto e = enumerate_paths(g);
    ASSERT_FALSE(e.paths.empty());
    bool iterated = false;
    for (const auto& p : e.paths) {
        EXPECT_EQ(p.is_rewarding, !p.loop_annotations.empty());
        for (const auto& a : p.loop_annotations) {
            EXPECT_TRUE(a.contains_call);
            iterated |= a.unroll_count_used > 0;
        }
        const auto all = detect_call_loops(g, p);
        EXPECT_EQ(all.size(), 1u);
    }
    EXPECT_TRUE(iterated);
    EXPECT_EQ(e.stats.loops_without_call, 0u);
}

TEST(Loops, LoopWithoutCallIsCountedNotAnnotated) {
    const auto e = fixture_paths("loop_without_call");
    EXPECT_EQ(e.stats.loops_without_call, 1u);
    for (const auto& p : e.paths) EXPECT_TRUE(p.loop_annotations.empty());
}

TEST(Signature, OrderedBySequence) {
    const auto e = fixture_paths("micro_ponzi");
    for (const auto& p : e.paths) {
        const auto sig = signature_of(p.effects);
        EXPECT_EQ(sig.effects.size(), p.effects.invest_events.size() + p.effects.reward_events.size());
        if (!sig.effects.empty()) EXPECT_EQ(sig.effects.front().mnemonic, "SSTORE");
    }
}

TEST(Aggregate, PartitionsFlaggedPaths) {
    for (const char* name : {"scenario1", "scenario2", "micro_ponzi", "loop_without_call"}) {
        SCOPED_TRACE(name);
        const auto e = fixture_paths(name);
        const auto aggs = aggregate_paths(e.paths);
        std::size_t flagged = 0;
        for (const auto& p : e.paths) flagged += p.is_investing || p.is_rewarding;
        std::size_t members = 0;
        std::set<PathSignature> seen;
        for (std::size_t i = 0; i < aggs.size(); ++i) {
            const auto& a = aggs[i];
            EXPECT_EQ(a.index, i);
            EXPECT_TRUE(seen.insert(a.signature).second);
            members += a.member_paths.size();
            for (const auto& m : a.member_paths) {
                EXPECT_EQ(signature_of(m.effects), a.signature);
                EXPECT_EQ(m.is_investing, a.is_investing);
                EXPECT_EQ(m.is_rewarding, a.is_rewarding);
                for (BlockId b : m.blocks) EXPECT_TRUE(a.union_blocks.count(b));
            }
        }
        EXPECT_EQ(members, flagged);
        // First-appearance numbering.
        std::vector<std::size_t> first;
        for (const auto& a : aggs) {
            const auto it = std::find_if(e.paths.begin(), e.paths.end(), [&](const ExecutionPath& p) {
                return p.blocks == a.member_paths.front().blocks;
            });
            first.push_back(static_cast<std::size_t>(it - e.paths.begin()));
        }
        EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
    }
}

TEST(Aggregate, Deterministic) {
    const auto a = aggregate_paths(fixture_paths("scenario1").paths);
    const auto b = aggregate_paths(fixture_paths("scenario1").paths);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].signature.render(), b[i].signature.render());
        EXPECT_EQ(a[i].union_blocks, b[i].union_blocks);
    }
}

TEST(Scenario1, ThreeAggregatesAllBothFlagged) {
    const auto e = fixture_paths("scenario1");
    const auto aggs = aggregate_paths(e.paths);
    ASSERT_EQ(aggs.size(), 3u);
    for (const auto& a : aggs) {
        EXPECT_TRUE(a.is_investing);
        EXPECT_TRUE(a.is_rewarding);
    }
    const auto shared = [](const AggregatedPath& a) {
        return std::any_of(a.slots_written.begin(), a.slots_written.end(),
                           [&](const std::string& s) { return a.slots_read.count(s) > 0; });
    };
    EXPECT_EQ(std::count_if(aggs.begin(), aggs.end(), shared), 2);
    EXPECT_FALSE(e.stats.truncated);
}

}  // namespace
}  // namespace ponzitrace::paths
