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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <ponzitrace/bytecode.hpp>
#include <ponzitrace/cfg.hpp>
#include <ponzitrace/symvalue.hpp>

namespace ponzitrace::symexec {

inline constexpr std::size_t kMaxStackDepth = 1024;

enum class Fault { kStackUnderflow, kDepthOverflow };

std::string_view to_string(Fault fault) noexcept;

/**
 * Memory as a store of concrete-offset cells. A write through a symbolic
 * offset turns on the havoc region: later reads of locations that were never
 * written at a concrete offset become Opaque.
 */
class Memory {
  public:
    void store(std::uint64_t offset, std::size_t size, const SymValue& value);
    //! Marks [offset, offset+size) as holding unknown data with the given taint.
    void clobber(std::uint64_t offset, std::size_t size, TaintSet taint, std::uint64_t opaque_id);
    void havoc(TaintSet taint) noexcept;
    //! 32-byte read; exact cell hits return the stored value.
    [[nodiscard]] SymValue load(std::uint64_t offset, std::uint64_t opaque_id) const;
    //! The word at offset if it is known exactly (never-written memory is
    //! zero unless the havoc region is active).
    [[nodiscard]] std::optional<SymValue> load_exact(std::uint64_t offset) const;
    [[nodiscard]] TaintSet taint_union() const noexcept;
    [[nodiscard]] TaintSet range_taint(std::uint64_t offset, std::uint64_t size) const;
    [[nodiscard]] bool havocked() const noexcept { return havoc_; }

  private:
    struct Cell {
        std::size_t size;
        SymValue value;
    };
    std::map<std::uint64_t, Cell> cells_;
    bool havoc_{false};
    TaintSet havoc_taint_;
};

struct StorageWrite {
    //! Position among all SSTORE/CALL events of the path.
    std::size_t seq{0};
    std::size_t offset{0};
    cfg::BlockId block{0};
    StorageSlot slot;
    SymValue slot_value;
    SymValue stored_value;
};

struct StorageRead {
    std::size_t offset{0};
    cfg::BlockId block{0};
    StorageSlot slot;
};

struct CallRecord {
    std::size_t seq{0};
    std::size_t offset{0};
    cfg::BlockId block{0};
    SymValue target;
    SymValue value;
};

struct MachineState {
    //! Top of stack is back().
    std::vector<SymValue> stack;
    Memory memory;
    std::vector<StorageWrite> transient_storage_writes;
    std::vector<StorageRead> storage_reads;
    std::vector<CallRecord> calls;
    std::optional<Fault> fault;
    std::size_t next_event_seq{0};
    //! Block the next instruction belongs to; stamped on recorded events.
    cfg::BlockId current_block{0};
};

//! EVM semantics of an arithmetic/logic opcode over concrete operands
//! (operand 0 was on top). nullopt for opcodes that are not foldable.
std::optional<u256> fold_concrete(std::uint8_t opcode, std::span<const u256> operands);

/**
 * Executes one instruction. Faults (underflow, depth overflow) are recorded
 * in state.fault and leave the state otherwise unchanged; stepping a faulted
 * state is a no-op.
 */
MachineState step(MachineState state, const bytecode::Instruction& instr);

//! In-place variant used by the executors.
void step_in_place(MachineState& state, const bytecode::Instruction& instr);

//! Runs every instruction of the block (stops early on fault).
void run_block(MachineState& state, const cfg::BasicBlock& block);

enum class CallerMatch { kValue, kSlotKey, kBoth };

std::string_view to_string(CallerMatch m) noexcept;

struct InvestEvent {
    std::size_t seq{0};
    cfg::BlockId block{0};
    std::size_t offset{0};
    StorageSlot slot;
    SymValue stored_value;
    //! Where the caller-derived taint was found.
    CallerMatch match{CallerMatch::kValue};
};

struct RewardEvent {
    std::size_t seq{0};
    cfg::BlockId block{0};
    std::size_t offset{0};
    SymValue target;
    SymValue value;
    //! Slots read inside the target expression.
    std::vector<StorageSlot> target_slots;
};

enum class PathEnd {
    kStop,        // STOP, RETURN, SELFDESTRUCT or running off the end
    kRevert,      // REVERT or INVALID
    kBadJump,     // concrete target that is not a JUMPDEST
    kUnresolved,  // symbolic jump target without a cfg successor
    kOpen,        // last block still has successors
};

std::string_view to_string(PathEnd e) noexcept;

struct PathEffects {
    std::vector<InvestEvent> invest_events;
    std::vector<RewardEvent> reward_events;
    std::vector<StorageSlot> touched_slots_read;
    std::vector<StorageSlot> touched_slots_written;
    //! Stack depth consistent end to end and every concrete jump target
    //! matches the next block of the sequence.
    bool feasible_shape{true};
    std::string infeasible_reason;
    PathEnd end{PathEnd::kOpen};
};

//! Derives invest/reward events from a finished machine state.
PathEffects collect_effects(const MachineState& state);

//! Runs the block except a trailing JUMP/JUMPI, leaving its operands on the
//! stack so the successor can be checked against the target.
void run_block_body(MachineState& state, const cfg::BasicBlock& block);

//! Steps the trailing JUMP/JUMPI, if any.
void finish_block(MachineState& state, const cfg::BasicBlock& block);

//! Top of stack before the block's trailing jump.
std::optional<SymValue> pending_jump_target(const MachineState& state, const cfg::BasicBlock& block);

//! False when a concrete pending jump target contradicts the edge.
bool edge_consistent(const MachineState& state, const cfg::Cfg& cfg, const cfg::CfgEdge& edge);

//! How a path ending in `last` terminates, given the state after its body.
PathEnd classify_end(const MachineState& state, const cfg::Cfg& cfg, const cfg::BasicBlock& last);

/**
 * Executes a block sequence from an empty stack.
 *
 * Throws Error(kDisconnectedSequence) if the sequence does not start at the
 * entry or a consecutive pair is not a cfg edge.
 */
PathEffects execute_path(const cfg::Cfg& cfg, std::span<const cfg::BlockId> block_sequence);

}  // namespace ponzitrace::symexec
