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
#include <string_view>
#include <utility>
#include <vector>

#include <ponzitrace/bytecode.hpp>

namespace ponzitrace::cfg {

using BlockId = std::size_t;

enum class Terminator { kJump, kConditionalJump, kStop, kReturn, kRevert, kSelfDestruct, kInvalid, kFallthrough };

std::string_view to_string(Terminator t) noexcept;

struct BasicBlock {
    BlockId id{0};
    std::size_t start_offset{0};
    std::vector<bytecode::Instruction> instructions;
    Terminator terminator{Terminator::kStop};

    [[nodiscard]] const bytecode::Instruction& last() const { return instructions.back(); }
    [[nodiscard]] bool starts_with_jumpdest() const;
    //! STOP, RETURN, REVERT, SELFDESTRUCT or INVALID: no successor at all.
    [[nodiscard]] bool is_halting() const noexcept;
    [[nodiscard]] bool contains(std::uint8_t opcode) const;
};

enum class EdgeKind { kJump, kBranchTaken, kBranchFallthrough, kFallthrough };

std::string_view to_string(EdgeKind k) noexcept;

struct CfgEdge {
    BlockId from{0};
    BlockId to{0};
    EdgeKind kind{EdgeKind::kFallthrough};

    friend auto operator<=>(const CfgEdge&, const CfgEdge&) = default;
};

struct UnresolvedJump {
    BlockId block{0};
    std::string reason;

    friend auto operator<=>(const UnresolvedJump&, const UnresolvedJump&) = default;
};

struct Cfg {
    std::vector<BasicBlock> blocks;
    //! Sorted by (from, to, kind).
    std::vector<CfgEdge> edges;
    BlockId entry{0};
    std::vector<UnresolvedJump> unresolved_jumps;
    //! Edges to a node on the DFS stack whose target dominates the source.
    std::vector<std::pair<BlockId, BlockId>> back_edges;
    //! Retreating edges whose target does not dominate the source.
    std::vector<std::pair<BlockId, BlockId>> irreducible_edges;
    //! Notes from jump resolution (context widening, depth limits).
    std::vector<std::string> diagnostics;

    [[nodiscard]] std::vector<CfgEdge> successors(BlockId id) const;
    [[nodiscard]] std::optional<BlockId> block_at(std::size_t offset) const;
    [[nodiscard]] std::vector<bool> reachable() const;
    [[nodiscard]] bool has_edge(BlockId from, BlockId to) const;
};

//! Tunables for jump resolution.
struct ResolverLimits {
    //! Distinct abstract entry stacks kept per block before widening.
    std::size_t max_contexts_per_block{16};
    std::size_t max_stack_depth{1024};
};

/**
 * Splits the instruction stream into basic blocks.
 *
 * A block starts at offset 0, at every JUMPDEST and after every terminator
 * or JUMPI. A block that runs off the end of the code ends with an implicit
 * STOP.
 */
std::vector<BasicBlock> partition_blocks(std::span<const bytecode::Instruction> instructions);

/**
 * Builds the control-flow graph.
 *
 * Jump targets come from a worklist over (block, abstract entry stack)
 * pairs: each block is run on the symbolic step machine and a JUMP/JUMPI
 * whose target is a concrete JUMPDEST offset gets an edge. Anything else is
 * listed in unresolved_jumps.
 */
Cfg build_cfg(std::vector<BasicBlock> blocks, const ResolverLimits& limits = {});

//! Back edges of a built cfg, ordered by (from, to).
std::vector<std::pair<BlockId, BlockId>> find_back_edges(const Cfg& cfg);

//! Immediate dominators of reachable blocks (entry maps to itself,
//! unreachable blocks to nullopt).
std::vector<std::optional<BlockId>> immediate_dominators(const Cfg& cfg);

bool dominates(const std::vector<std::optional<BlockId>>& idom, BlockId a, BlockId b);

//! Natural loop body of a back edge: header plus every block that reaches
//! the source without passing through the header. Sorted.
std::vector<BlockId> natural_loop(const Cfg& cfg, BlockId from, BlockId header);

//! Convenience: parse, disassemble, partition and build.
Cfg build_cfg_from_code(const bytecode::Bytecode& code, const ResolverLimits& limits = {});

}  // namespace ponzitrace::cfg
