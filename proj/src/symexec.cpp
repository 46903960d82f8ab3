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

#include <ponzitrace/symexec.hpp>

#include <algorithm>

#include <ponzitrace/error.hpp>

namespace ponzitrace::symexec {

namespace {

using boost::multiprecision::cpp_int;
using bytecode::Instruction;

constexpr std::uint64_t kMaxTrackedOffset = 1ULL << 32;
constexpr std::size_t kMaxHashedWords = 16;

bool is_negative(const u256& x) { return bit_test(x, 255); }
u256 negate(const u256& x) { return ~x + 1; }
u256 abs_value(const u256& x) { return is_negative(x) ? negate(x) : x; }

cpp_int modulus_2_256() { return cpp_int(1) << 256; }

u256 from_cpp_int(const cpp_int& v) { return static_cast<u256>(v % modulus_2_256()); }

std::optional<std::uint64_t> small_offset(const SymValue& v) {
    if (!v.is_concrete() || v.value() >= kMaxTrackedOffset) return std::nullopt;
    return static_cast<std::uint64_t>(v.value());
}

}  // namespace

std::string_view to_string(Fault fault) noexcept {
    return fault == Fault::kStackUnderflow ? "StackUnderflow" : "DepthOverflow";
}

std::string_view to_string(CallerMatch m) noexcept {
    switch (m) {
        case CallerMatch::kValue:
            return "value";
        case CallerMatch::kSlotKey:
            return "slot_key";
        case CallerMatch::kBoth:
            return "both";
    }
    return "value";
}

std::string_view to_string(PathEnd e) noexcept {
    switch (e) {
        case PathEnd::kStop:
            return "stop";
        case PathEnd::kRevert:
            return "revert";
        case PathEnd::kBadJump:
            return "bad_jump";
        case PathEnd::kUnresolved:
            return "unresolved";
        case PathEnd::kOpen:
            return "open";
    }
    return "open";
}

// ---------------------------------------------------------------------------
// Memory

void Memory::store(std::uint64_t offset, std::size_t size, const SymValue& value) {
    const std::uint64_t end = offset + size;
    // Cut every overlapping cell; keep uncovered remnants as opaque data.
    auto it = cells_.lower_bound(offset);
    if (it != cells_.begin()) --it;
    std::vector<std::pair<std::uint64_t, Cell>> remnants;
    while (it != cells_.end() && it->first < end) {
        const std::uint64_t c_begin = it->first;
        const std::uint64_t c_end = c_begin + it->second.size;
        if (c_end <= offset) {
            ++it;
            continue;
        }
        const TaintSet t = it->second.value.taint();
        if (c_begin < offset) {
            remnants.emplace_back(c_begin, Cell{static_cast<std::size_t>(offset - c_begin),
                                                SymValue::opaque(c_begin, "MEMORY", t)});
        }
        if (c_end > end) {
            remnants.emplace_back(end, Cell{static_cast<std::size_t>(c_end - end), SymValue::opaque(end, "MEMORY", t)});
        }
        it = cells_.erase(it);
    }
    for (auto& [off, cell] : remnants) cells_.insert_or_assign(off, std::move(cell));
    cells_.insert_or_assign(offset, Cell{size, value});
}

void Memory::clobber(std::uint64_t offset, std::size_t size, TaintSet taint, std::uint64_t opaque_id) {
    if (size == 0) return;
    store(offset, size, SymValue::opaque(opaque_id, "MEMORY", taint));
}

void Memory::havoc(TaintSet taint) noexcept {
    havoc_ = true;
    havoc_taint_ |= taint;
}

std::optional<SymValue> Memory::load_exact(std::uint64_t offset) const {
    const std::uint64_t end = offset + 32;
    auto it = cells_.lower_bound(offset);
    if (it != cells_.end() && it->first == offset && it->second.size == 32) {
        if (it->second.value.kind() == SymValue::Kind::kOpaque && it->second.value.mnemonic() == "MEMORY") {
            return std::nullopt;
        }
        return it->second.value;
    }
    if (it != cells_.begin()) {
        auto prev = std::prev(it);
        if (prev->first + prev->second.size > offset) return std::nullopt;
    }
    if (it != cells_.end() && it->first < end) return std::nullopt;
    if (havoc_) return std::nullopt;
    return SymValue::concrete(0);
}

TaintSet Memory::taint_union() const noexcept {
    TaintSet t = havoc_taint_;
    for (const auto& [off, cell] : cells_) t |= cell.value.taint();
    return t;
}

TaintSet Memory::range_taint(std::uint64_t offset, std::uint64_t size) const {
    TaintSet t = havoc_taint_;
    const std::uint64_t end = offset + size;
    for (const auto& [off, cell] : cells_) {
        if (off < end && off + cell.size > offset) t |= cell.value.taint();
    }
    return t;
}

SymValue Memory::load(std::uint64_t offset, std::uint64_t opaque_id) const {
    if (auto v = load_exact(offset)) return *v;
    return SymValue::opaque(opaque_id, "MLOAD", range_taint(offset, 32));
}

// ---------------------------------------------------------------------------
// Constant folding

std::optional<u256> fold_concrete(std::uint8_t opcode, std::span<const u256> o) {
    auto need = [&](std::size_t n) { return o.size() >= n; };
    switch (opcode) {
        case 0x01:
            if (need(2)) return o[0] + o[1];
            break;
        case 0x02:
            if (need(2)) return o[0] * o[1];
            break;
        case 0x03:
            if (need(2)) return o[0] - o[1];
            break;
        case 0x04:
            if (need(2)) return o[1] == 0 ? u256(0) : u256(o[0] / o[1]);
            break;
        case 0x05:  // SDIV
            if (need(2)) {
                if (o[1] == 0) return u256(0);
                const u256 q = abs_value(o[0]) / abs_value(o[1]);
                return is_negative(o[0]) != is_negative(o[1]) ? negate(q) : q;
            }
            break;
        case 0x06:
            if (need(2)) return o[1] == 0 ? u256(0) : u256(o[0] % o[1]);
            break;
        case 0x07:  // SMOD
            if (need(2)) {
                if (o[1] == 0) return u256(0);
                const u256 r = abs_value(o[0]) % abs_value(o[1]);
                return is_negative(o[0]) ? negate(r) : r;
            }
            break;
        case 0x08:  // ADDMOD
            if (need(3)) {
                if (o[2] == 0) return u256(0);
                return from_cpp_int((cpp_int(o[0]) + cpp_int(o[1])) % cpp_int(o[2]));
            }
            break;
        case 0x09:  // MULMOD
            if (need(3)) {
                if (o[2] == 0) return u256(0);
                return from_cpp_int((cpp_int(o[0]) * cpp_int(o[1])) % cpp_int(o[2]));
            }
            break;
        case 0x0a:  // EXP
            if (need(2)) return from_cpp_int(boost::multiprecision::powm(cpp_int(o[0]), cpp_int(o[1]), modulus_2_256()));
            break;
        case 0x0b:  // SIGNEXTEND
            if (need(2)) {
                if (o[0] >= 31) return o[1];
                const unsigned bit = static_cast<unsigned>(o[0]) * 8 + 7;
                const u256 mask = (u256(1) << (bit + 1)) - 1;
                return bit_test(o[1], bit) ? u256(o[1] | ~mask) : u256(o[1] & mask);
            }
            break;
        case 0x10:
            if (need(2)) return u256(o[0] < o[1] ? 1 : 0);
            break;
        case 0x11:
            if (need(2)) return u256(o[0] > o[1] ? 1 : 0);
            break;
        case 0x12:  // SLT
        case 0x13:  // SGT
            if (need(2)) {
                const bool na = is_negative(o[0]);
                const bool nb = is_negative(o[1]);
                bool lt = (na != nb) ? na : o[0] < o[1];
                bool gt = (na != nb) ? nb : o[0] > o[1];
                return u256((opcode == 0x12 ? lt : gt) ? 1 : 0);
            }
            break;
        case 0x14:
            if (need(2)) return u256(o[0] == o[1] ? 1 : 0);
            break;
        case 0x15:
            if (need(1)) return u256(o[0] == 0 ? 1 : 0);
            break;
        case 0x16:
            if (need(2)) return o[0] & o[1];
            break;
        case 0x17:
            if (need(2)) return o[0] | o[1];
            break;
        case 0x18:
            if (need(2)) return o[0] ^ o[1];
            break;
        case 0x19:
            if (need(1)) return ~o[0];
            break;
        case 0x1a:  // BYTE
            if (need(2)) {
                if (o[0] >= 32) return u256(0);
                const unsigned shift = 8 * (31 - static_cast<unsigned>(o[0]));
                return (o[1] >> shift) & 0xff;
            }
            break;
        case 0x1b:  // SHL
            if (need(2)) return o[0] >= 256 ? u256(0) : u256(o[1] << static_cast<unsigned>(o[0]));
            break;
        case 0x1c:  // SHR
            if (need(2)) return o[0] >= 256 ? u256(0) : u256(o[1] >> static_cast<unsigned>(o[0]));
            break;
        case 0x1d:  // SAR
            if (need(2)) {
                const bool neg = is_negative(o[1]);
                if (o[0] >= 256) return neg ? u256(~u256(0)) : u256(0);
                const unsigned s = static_cast<unsigned>(o[0]);
                return neg ? u256(~((~o[1]) >> s)) : u256(o[1] >> s);
            }
            break;
        default:
            break;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// step

void step_in_place(MachineState& st, const Instruction& ins) {
    if (st.fault) return;
    const auto& spec = ins.spec();
    const std::uint8_t op = ins.opcode;
    auto& stack = st.stack;

    if (stack.size() < spec.pops) {
        st.fault = Fault::kStackUnderflow;
        return;
    }
    if (stack.size() - spec.pops + spec.pushes > kMaxStackDepth) {
        st.fault = Fault::kDepthOverflow;
        return;
    }

    if (op >= bytecode::op::kDup1 && op <= bytecode::op::kDup16) {
        const std::size_t n = op - bytecode::op::kDup1 + 1;
        stack.push_back(stack[stack.size() - n]);
        return;
    }
    if (op >= bytecode::op::kSwap1 && op <= bytecode::op::kSwap16) {
        const std::size_t n = op - bytecode::op::kSwap1 + 1;
        std::swap(stack.back(), stack[stack.size() - 1 - n]);
        return;
    }

    std::vector<SymValue> args;
    args.reserve(spec.pops);
    for (std::size_t i = 0; i < spec.pops; ++i) {
        args.push_back(std::move(stack.back()));
        stack.pop_back();
    }
    TaintSet taint;
    for (const auto& a : args) taint |= a.taint();

    auto region = [&](const SymValue& offset, const SymValue& size) {
        const auto off = small_offset(offset);
        const auto len = small_offset(size);
        if (off && len) {
            st.memory.clobber(*off, static_cast<std::size_t>(*len), taint, ins.offset);
        } else {
            st.memory.havoc(taint);
        }
    };

    std::optional<SymValue> result;
    switch (op) {
        case bytecode::op::kPush0:
            result = SymValue::concrete(0);
            break;
        case 0x01: case 0x02: case 0x03: case 0x04: case 0x05: case 0x06: case 0x07:
        case 0x08: case 0x09: case 0x0a: case 0x0b: case 0x10: case 0x11: case 0x12:
        case 0x13: case 0x14: case 0x15: case 0x16: case 0x17: case 0x18: case 0x19:
        case 0x1a: case 0x1b: case 0x1c: case 0x1d: {
            const bool all_concrete = std::all_of(args.begin(), args.end(), [](const SymValue& a) { return a.is_concrete(); });
            if (all_concrete) {
                std::vector<u256> values;
                values.reserve(args.size());
                for (const auto& a : args) values.push_back(a.value());
                result = SymValue::concrete(*fold_concrete(op, values), taint);
            } else {
                result = SymValue::op(spec.mnemonic, std::move(args));
            }
            break;
        }
        case bytecode::op::kSha3: {
            const auto off = small_offset(args[0]);
            const auto len = small_offset(args[1]);
            if (off && len && *len % 32 == 0 && *len / 32 <= kMaxHashedWords) {
                std::vector<SymValue> words;
                bool known = true;
                for (std::uint64_t k = 0; k < *len && known; k += 32) {
                    auto w = st.memory.load_exact(*off + k);
                    if (w) {
                        words.push_back(std::move(*w));
                    } else {
                        known = false;
                    }
                }
                if (known) {
                    result = SymValue::sha3(std::move(words));
                    break;
                }
            }
            TaintSet t = taint;
            if (off && len) {
                t |= st.memory.range_taint(*off, *len);
            } else {
                t |= st.memory.taint_union();
            }
            result = SymValue::opaque(ins.offset, spec.mnemonic, t);
            break;
        }
        case bytecode::op::kCaller:
            result = SymValue::caller();
            break;
        case bytecode::op::kCallValue:
            result = SymValue::call_value();
            break;
        case bytecode::op::kCallDataLoad:
            result = SymValue::calldata_load(args[0]);
            break;
        case 0x58:  // PC
            result = SymValue::concrete(ins.offset);
            break;
        case bytecode::op::kMload:
            if (const auto off = small_offset(args[0])) {
                result = st.memory.load(*off, ins.offset);
            } else {
                result = SymValue::opaque(ins.offset, spec.mnemonic, taint | st.memory.taint_union());
            }
            break;
        case bytecode::op::kMstore:
            if (const auto off = small_offset(args[0])) {
                st.memory.store(*off, 32, args[1]);
            } else {
                st.memory.havoc(args[1].taint());
            }
            break;
        case bytecode::op::kMstore8:
            if (const auto off = small_offset(args[0])) {
                st.memory.clobber(*off, 1, args[1].taint(), ins.offset);
            } else {
                st.memory.havoc(args[1].taint());
            }
            break;
        case bytecode::op::kSload: {
            StorageSlot slot = canonical_slot(args[0]);
            st.storage_reads.push_back(StorageRead{ins.offset, st.current_block, slot});
            result = SymValue::sload(slot);
            break;
        }
        case bytecode::op::kSstore:
            st.transient_storage_writes.push_back(
                StorageWrite{st.next_event_seq++, ins.offset, st.current_block, canonical_slot(args[0]), args[0], args[1]});
            break;
        case bytecode::op::kCall:
        case 0xf2:  // CALLCODE
            if (op == bytecode::op::kCall) {
                st.calls.push_back(CallRecord{st.next_event_seq++, ins.offset, st.current_block, args[1], args[2]});
            }
            region(args[5], args[6]);
            result = SymValue::opaque(ins.offset, spec.mnemonic, taint);
            break;
        case 0xf4:  // DELEGATECALL
        case 0xfa:  // STATICCALL
            region(args[4], args[5]);
            result = SymValue::opaque(ins.offset, spec.mnemonic, taint);
            break;
        case 0x37:  // CALLDATACOPY
        case 0x39:  // CODECOPY
        case 0x3e:  // RETURNDATACOPY
        case 0x5e:  // MCOPY
            region(args[0], args[2]);
            break;
        case 0x3c:  // EXTCODECOPY
            region(args[1], args[3]);
            break;
        default:
            if (spec.immediate_len > 0) result = SymValue::concrete(*ins.immediate);
            break;
    }

    if (spec.pushes == 1) {
        stack.push_back(result ? std::move(*result) : SymValue::opaque(ins.offset, spec.mnemonic, taint));
    }
}

MachineState step(MachineState state, const Instruction& instr) {
    step_in_place(state, instr);
    return state;
}

void run_block(MachineState& state, const cfg::BasicBlock& block) {
    state.current_block = block.id;
    for (const auto& ins : block.instructions) {
        step_in_place(state, ins);
        if (state.fault) return;
    }
}

// ---------------------------------------------------------------------------
// Path-level helpers

namespace {

void add_unique(std::vector<StorageSlot>& out, const StorageSlot& s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

}  // namespace

PathEffects collect_effects(const MachineState& state) {
    PathEffects fx;
    for (const auto& r : state.storage_reads) add_unique(fx.touched_slots_read, r.slot);
    for (const auto& w : state.transient_storage_writes) {
        add_unique(fx.touched_slots_written, w.slot);
        const bool in_value = w.stored_value.taint().caller;
        const bool in_key = w.slot_value.taint().caller;
        if (!in_value && !in_key) continue;
        const CallerMatch m = in_value && in_key ? CallerMatch::kBoth : in_value ? CallerMatch::kValue : CallerMatch::kSlotKey;
        fx.invest_events.push_back(InvestEvent{w.seq, w.block, w.offset, w.slot, w.stored_value, m});
    }
    for (const auto& c : state.calls) {
        if (!c.target.taint().storage) continue;
        fx.reward_events.push_back(RewardEvent{c.seq, c.block, c.offset, c.target, c.value, c.target.sload_slots()});
    }
    if (state.fault) {
        fx.feasible_shape = false;
        fx.infeasible_reason = std::string{to_string(*state.fault)};
    }
    return fx;
}

void run_block_body(MachineState& state, const cfg::BasicBlock& block) {
    state.current_block = block.id;
    const auto& ins = block.instructions;
    const bool trailing_jump = ins.back().spec().is_jump || ins.back().spec().is_conditional_jump;
    const std::size_t n = trailing_jump ? ins.size() - 1 : ins.size();
    for (std::size_t i = 0; i < n && !state.fault; ++i) step_in_place(state, ins[i]);
}

void finish_block(MachineState& state, const cfg::BasicBlock& block) {
    const auto& last = block.instructions.back();
    if (last.spec().is_jump || last.spec().is_conditional_jump) step_in_place(state, last);
}

std::optional<SymValue> pending_jump_target(const MachineState& state, const cfg::BasicBlock& block) {
    const auto& last = block.instructions.back();
    if (!(last.spec().is_jump || last.spec().is_conditional_jump) || state.stack.empty() || state.fault) {
        return std::nullopt;
    }
    return state.stack.back();
}

bool edge_consistent(const MachineState& state, const cfg::Cfg& cfg, const cfg::CfgEdge& edge) {
    if (edge.kind == cfg::EdgeKind::kFallthrough || edge.kind == cfg::EdgeKind::kBranchFallthrough) {
        return !state.fault;
    }
    const auto target = pending_jump_target(state, cfg.blocks[edge.from]);
    if (!target) return false;
    if (!target->is_concrete()) return true;
    return target->value() == cfg.blocks[edge.to].start_offset;
}

PathEnd classify_end(const MachineState& state, const cfg::Cfg& cfg, const cfg::BasicBlock& last) {
    switch (last.terminator) {
        case cfg::Terminator::kStop:
        case cfg::Terminator::kReturn:
        case cfg::Terminator::kSelfDestruct:
            return PathEnd::kStop;
        case cfg::Terminator::kRevert:
        case cfg::Terminator::kInvalid:
            return PathEnd::kRevert;
        default:
            break;
    }
    for (const auto& e : cfg.successors(last.id)) {
        if (edge_consistent(state, cfg, e)) return PathEnd::kOpen;
    }
    if (const auto target = pending_jump_target(state, last); target && target->is_concrete()) {
        const auto dest = cfg.block_at(static_cast<std::size_t>(std::min<u256>(target->value(), u256(SIZE_MAX))));
        if (!dest || !cfg.blocks[*dest].starts_with_jumpdest()) return PathEnd::kBadJump;
    }
    return PathEnd::kUnresolved;
}

PathEffects execute_path(const cfg::Cfg& cfg, std::span<const cfg::BlockId> seq) {
    constexpr std::string_view kModule = "symexec";
    if (seq.empty() || seq.front() != cfg.entry) {
        throw Error(ErrorCode::kDisconnectedSequence, kModule, "sequence must start at the entry block");
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] >= cfg.blocks.size()) {
            throw Error(ErrorCode::kDisconnectedSequence, kModule, "unknown block " + std::to_string(seq[i]));
        }
        if (i + 1 < seq.size() && !cfg.has_edge(seq[i], seq[i + 1])) {
            throw Error(ErrorCode::kDisconnectedSequence, kModule,
                        "no edge " + std::to_string(seq[i]) + "->" + std::to_string(seq[i + 1]));
        }
    }

    MachineState state;
    std::string mismatch;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& block = cfg.blocks[seq[i]];
        run_block_body(state, block);
        if (state.fault) break;
        if (i + 1 == seq.size()) {
            const PathEnd end = classify_end(state, cfg, block);
            finish_block(state, block);
            PathEffects fx = collect_effects(state);
            fx.end = end;
            return fx;
        }
        bool consistent = false;
        for (const auto& e : cfg.successors(block.id)) {
            if (e.to == seq[i + 1] && edge_consistent(state, cfg, e)) consistent = true;
        }
        if (!consistent) {
            mismatch = "jump target mismatch at block " + std::to_string(block.id);
            break;
        }
        finish_block(state, block);
        if (state.fault) break;
    }
    PathEffects fx = collect_effects(state);
    fx.feasible_shape = false;
    if (fx.infeasible_reason.empty()) fx.infeasible_reason = mismatch;
    return fx;
}

}  // namespace ponzitrace::symexec
