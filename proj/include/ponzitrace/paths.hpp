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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <ponzitrace/cfg.hpp>
#include <ponzitrace/symexec.hpp>

namespace ponzitrace::paths {

using cfg::BlockId;

struct Bounds {
    std::size_t max_paths{4096};
    std::size_t max_blocks_per_path{256};
    //! Times each back edge may be taken on one path.
    std::size_t loop_unroll{1};
};

struct LoopAnnotation {
    BlockId header{0};
    //! Natural-loop body, sorted; contains header.
    std::vector<BlockId> body;
    bool contains_call{false};
    //! How often the path took this loop's back edge.
    std::size_t unroll_count_used{0};
};

struct ExecutionPath {
    std::vector<BlockId> blocks;
    symexec::PathEffects effects;
    bool is_investing{false};
    bool is_rewarding{false};
    //! CALL-bearing loops touched by a rewarding path.
    std::vector<LoopAnnotation> loop_annotations;
};

//! One critical effect as it participates in path equality.
struct EffectDescriptor {
    std::string mnemonic;            // "SSTORE" or "CALL"
    std::vector<std::string> slots;  // invest slot, or sorted reward target slots
    std::vector<std::string> taint;  // taint names of stored value / target

    friend auto operator<=>(const EffectDescriptor&, const EffectDescriptor&) = default;
};

struct PathSignature {
    std::vector<EffectDescriptor> effects;

    friend auto operator<=>(const PathSignature&, const PathSignature&) = default;
    [[nodiscard]] std::string render() const;
};

struct AggregatedPath {
    std::size_t index{0};
    PathSignature signature;
    std::vector<ExecutionPath> member_paths;
    std::set<BlockId> union_blocks;
    std::set<std::pair<BlockId, BlockId>> union_edges;
    bool is_investing{false};
    bool is_rewarding{false};
    //! Canonical keys of invest-event slots.
    std::set<std::string> slots_written;
    //! Canonical keys of reward-event target slots.
    std::set<std::string> slots_read;
    //! Merged by header.
    std::vector<LoopAnnotation> loop_annotations;
};

struct EnumerationStats {
    std::size_t kept{0};
    std::size_t discarded_revert{0};
    std::size_t discarded_infeasible{0};
    std::size_t discarded_bad_jump{0};
    std::size_t discarded_loop_bound{0};
    std::size_t discarded_length{0};
    std::size_t unresolved_ends{0};
    std::size_t loops_without_call{0};
    bool truncated{false};
};

struct Enumeration {
    std::vector<ExecutionPath> paths;
    EnumerationStats stats;
    std::vector<std::string> diagnostics;
};

/**
 * Depth-first enumeration of entry-to-exit paths, executing each path on the
 * step machine as it grows. Successors whose edge contradicts a concrete jump
 * target are pruned, each back edge is taken at most loop_unroll times, and
 * paths that fault, revert or jump to a non-JUMPDEST are discarded.
 * Successors are visited in ascending block id order.
 */
Enumeration enumerate_paths(const cfg::Cfg& cfg, const Bounds& bounds = {});

//! (is_investing, is_rewarding) from the path's events.
std::pair<bool, bool> classify_path(const ExecutionPath& path);

//! Loops whose body intersects the path, with and without CALL.
std::vector<LoopAnnotation> detect_call_loops(const cfg::Cfg& cfg, const ExecutionPath& path);

PathSignature signature_of(const symexec::PathEffects& effects);

/**
 * Groups flagged paths by signature. Aggregates are numbered in order of
 * their first member; paths with neither flag are skipped.
 */
std::vector<AggregatedPath> aggregate_paths(const std::vector<ExecutionPath>& paths);

}  // namespace ponzitrace::paths
