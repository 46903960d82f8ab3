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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <ponzitrace/word.hpp>

namespace ponzitrace::symexec {

//! Provenance flags carried by every symbolic value.
struct TaintSet {
    bool caller{false};
    bool storage{false};

    constexpr TaintSet& operator|=(TaintSet other) noexcept {
        caller = caller || other.caller;
        storage = storage || other.storage;
        return *this;
    }
    friend constexpr TaintSet operator|(TaintSet a, TaintSet b) noexcept { return a |= b; }
    friend constexpr bool operator==(TaintSet, TaintSet) noexcept = default;

    [[nodiscard]] constexpr bool empty() const noexcept { return !caller && !storage; }
    [[nodiscard]] std::vector<std::string> names() const;
};

inline constexpr TaintSet kCallerTaint{true, false};
inline constexpr TaintSet kStorageTaint{false, true};

/**
 * Canonical identity of a persistent storage location.
 *
 * Equality is canonical_key equality. Hashed slots describe the Solidity
 * layout of mappings (keccak(key . base)) and dynamic arrays (keccak(base) +
 * index) without ever rendering the unresolved key or index.
 */
class StorageSlot {
  public:
    enum class Kind { kStateVariable, kHashed, kUnknown };
    enum class KeyShape { kMappingKey, kArrayIndex, kOpaque };

    static StorageSlot state_variable(const u256& number);
    static StorageSlot hashed(const StorageSlot& base, KeyShape shape);
    static StorageSlot unknown(std::uint64_t id);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] KeyShape key_shape() const noexcept { return shape_; }
    [[nodiscard]] const u256& number() const noexcept { return number_; }
    //! Base slot of a hashed slot; nullptr for other kinds.
    [[nodiscard]] const StorageSlot* base() const noexcept { return base_.get(); }
    [[nodiscard]] std::uint64_t unknown_id() const noexcept { return unknown_id_; }
    [[nodiscard]] const std::string& canonical_key() const noexcept { return key_; }

    /**
     * Decimal storage address where the structure's data begins, when the
     * base is a plain state-variable slot and the shape is array_index
     * (keccak256 of the base slot). Empty otherwise.
     */
    [[nodiscard]] std::string data_address() const;

    friend bool operator==(const StorageSlot& a, const StorageSlot& b) noexcept { return a.key_ == b.key_; }
    friend auto operator<=>(const StorageSlot& a, const StorageSlot& b) noexcept { return a.key_ <=> b.key_; }

  private:
    Kind kind_{Kind::kUnknown};
    KeyShape shape_{KeyShape::kOpaque};
    u256 number_{0};
    std::shared_ptr<const StorageSlot> base_;
    std::uint64_t unknown_id_{0};
    std::string key_;
};

std::string_view to_string(StorageSlot::Kind kind) noexcept;
std::string_view to_string(StorageSlot::KeyShape shape) noexcept;

/**
 * Immutable symbolic 256-bit value with provenance.
 *
 * Operations over concrete operands fold to Concrete. Everything else builds
 * an expression tree whose taint is the union of its operands' taints.
 */
class SymValue {
  public:
    enum class Kind { kConcrete, kCaller, kCallValue, kCallDataLoad, kSLoad, kSha3, kOp, kOpaque };

    static SymValue concrete(const u256& value, TaintSet taint = {});
    static SymValue caller();
    static SymValue call_value();
    static SymValue calldata_load(const SymValue& offset);
    static SymValue sload(const StorageSlot& slot);
    static SymValue sha3(std::vector<SymValue> preimage);
    //! Operation node; operands in stack order (operand 0 was on top).
    static SymValue op(std::string_view mnemonic, std::vector<SymValue> operands);
    static SymValue opaque(std::uint64_t id, std::string_view origin, TaintSet taint);

    [[nodiscard]] Kind kind() const noexcept;
    [[nodiscard]] TaintSet taint() const noexcept;
    [[nodiscard]] bool is_concrete() const noexcept { return kind() == Kind::kConcrete; }
    //! Concrete payload; zero for other kinds.
    [[nodiscard]] const u256& value() const noexcept;
    [[nodiscard]] std::span<const SymValue> operands() const noexcept;
    //! Operation mnemonic for kOp, origin mnemonic for kOpaque.
    [[nodiscard]] std::string_view mnemonic() const noexcept;
    //! Slot read by a kSLoad value. Only valid for kSLoad.
    [[nodiscard]] const StorageSlot& slot() const;
    [[nodiscard]] std::uint64_t opaque_id() const noexcept;
    //! Structural hash: equal for structurally equal trees.
    [[nodiscard]] std::uint64_t structural_hash() const noexcept;

    //! Human-readable rendering, truncated beyond max_len characters.
    [[nodiscard]] std::string render(std::size_t max_len = 256) const;

    //! Slots read anywhere in this tree, in first-visit order, deduplicated.
    [[nodiscard]] std::vector<StorageSlot> sload_slots() const;

    friend bool structurally_equal(const SymValue& a, const SymValue& b);

  private:
    struct Node;
    explicit SymValue(std::shared_ptr<const Node> node) : node_{std::move(node)} {}
    std::shared_ptr<const Node> node_;
};

/**
 * Maps the slot operand of SLOAD/SSTORE to a canonical storage slot.
 *
 * Concrete(n) is a state variable; keccak(key . n) a mapping entry;
 * keccak(n) optionally plus an index an array element. Additive offsets on a
 * hashed slot (struct members, element index) fold into the same slot.
 * Anything else is Unknown, with an id derived from the expression's
 * structure so it is stable within and across runs.
 */
StorageSlot canonical_slot(const SymValue& value);

}  // namespace ponzitrace::symexec
