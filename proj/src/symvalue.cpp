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

#include <ponzitrace/symvalue.hpp>

#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_set>

namespace ponzitrace::symexec {

namespace {

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
    // splitmix64 finalizer over the running hash
    std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_text(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    return h;
}

std::uint64_t hash_word(const u256& v) noexcept {
    std::uint64_t h = 0x51ed27a1ULL;
    u256 x = v;
    for (int i = 0; i < 4; ++i) {
        h = mix(h, static_cast<std::uint64_t>(x & 0xffffffffffffffffULL));
        x >>= 64;
    }
    return h;
}

const u256 kZero = 0;

}  // namespace

std::vector<std::string> TaintSet::names() const {
    std::vector<std::string> out;
    if (caller) out.emplace_back("caller_derived");
    if (storage) out.emplace_back("storage_derived");
    return out;
}

// ---------------------------------------------------------------------------
// StorageSlot

StorageSlot StorageSlot::state_variable(const u256& number) {
    StorageSlot s;
    s.kind_ = Kind::kStateVariable;
    s.number_ = number;
    s.key_ = to_decimal(number);
    return s;
}

StorageSlot StorageSlot::hashed(const StorageSlot& base, KeyShape shape) {
    StorageSlot s;
    s.kind_ = Kind::kHashed;
    s.shape_ = shape;
    s.base_ = std::make_shared<const StorageSlot>(base);
    switch (shape) {
        case KeyShape::kMappingKey:
            s.key_ = "h(·," + base.key_ + ")";
            break;
        case KeyShape::kArrayIndex:
            s.key_ = "h(" + base.key_ + ")+i";
            break;
        case KeyShape::kOpaque:
            s.key_ = "h(…," + base.key_ + ")";
            break;
    }
    return s;
}

StorageSlot StorageSlot::unknown(std::uint64_t id) {
    StorageSlot s;
    s.kind_ = Kind::kUnknown;
    s.unknown_id_ = id;
    char buf[24];
    std::snprintf(buf, sizeof buf, "?%016llx", static_cast<unsigned long long>(id));
    s.key_ = buf;
    return s;
}

std::string StorageSlot::data_address() const {
    if (kind_ != Kind::kHashed || shape_ != KeyShape::kArrayIndex || !base_ ||
        base_->kind() != Kind::kStateVariable) {
        return {};
    }
    const auto preimage = word_to_be(base_->number());
    return to_decimal(word_from_be(keccak256(preimage)));
}

std::string_view to_string(StorageSlot::Kind kind) noexcept {
    switch (kind) {
        case StorageSlot::Kind::kStateVariable:
            return "state_variable";
        case StorageSlot::Kind::kHashed:
            return "array_or_mapping";
        case StorageSlot::Kind::kUnknown:
            return "unknown";
    }
    return "unknown";
}

std::string_view to_string(StorageSlot::KeyShape shape) noexcept {
    switch (shape) {
        case StorageSlot::KeyShape::kMappingKey:
            return "mapping_key";
        case StorageSlot::KeyShape::kArrayIndex:
            return "array_index";
        case StorageSlot::KeyShape::kOpaque:
            return "opaque";
    }
    return "opaque";
}

// ---------------------------------------------------------------------------
// SymValue

struct SymValue::Node {
    Kind kind{Kind::kOpaque};
    TaintSet taint;
    u256 value{0};
    std::vector<SymValue> operands;
    std::string mnemonic;
    std::optional<StorageSlot> slot;
    std::uint64_t opaque_id{0};
    std::uint64_t hash{0};
};

SymValue SymValue::concrete(const u256& value, TaintSet taint) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kConcrete;
    n->value = value;
    n->taint = taint;
    n->hash = mix(1, hash_word(value));
    return SymValue{std::move(n)};
}

SymValue SymValue::caller() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kCaller;
    n->taint = kCallerTaint;
    n->hash = mix(2, 0);
    return SymValue{std::move(n)};
}

SymValue SymValue::call_value() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kCallValue;
    n->hash = mix(3, 0);
    return SymValue{std::move(n)};
}

SymValue SymValue::calldata_load(const SymValue& offset) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kCallDataLoad;
    n->taint = offset.taint();
    n->hash = mix(4, offset.structural_hash());
    n->operands.push_back(offset);
    return SymValue{std::move(n)};
}

SymValue SymValue::sload(const StorageSlot& slot) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kSLoad;
    n->taint = kStorageTaint;
    n->hash = mix(5, hash_text(slot.canonical_key()));
    n->slot = slot;
    return SymValue{std::move(n)};
}

SymValue SymValue::sha3(std::vector<SymValue> preimage) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kSha3;
    std::uint64_t h = mix(6, preimage.size());
    for (const auto& w : preimage) {
        n->taint |= w.taint();
        h = mix(h, w.structural_hash());
    }
    n->hash = h;
    n->operands = std::move(preimage);
    return SymValue{std::move(n)};
}

SymValue SymValue::op(std::string_view mnemonic, std::vector<SymValue> operands) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kOp;
    n->mnemonic = std::string{mnemonic};
    std::uint64_t h = mix(7, hash_text(mnemonic));
    for (const auto& o : operands) {
        n->taint |= o.taint();
        h = mix(h, o.structural_hash());
    }
    n->hash = h;
    n->operands = std::move(operands);
    return SymValue{std::move(n)};
}

SymValue SymValue::opaque(std::uint64_t id, std::string_view origin, TaintSet taint) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kOpaque;
    n->mnemonic = std::string{origin};
    n->opaque_id = id;
    n->taint = taint;
    n->hash = mix(mix(8, id), hash_text(origin));
    return SymValue{std::move(n)};
}

SymValue::Kind SymValue::kind() const noexcept { return node_->kind; }
TaintSet SymValue::taint() const noexcept { return node_->taint; }
const u256& SymValue::value() const noexcept { return node_->kind == Kind::kConcrete ? node_->value : kZero; }
std::span<const SymValue> SymValue::operands() const noexcept { return node_->operands; }
std::string_view SymValue::mnemonic() const noexcept { return node_->mnemonic; }
std::uint64_t SymValue::opaque_id() const noexcept { return node_->opaque_id; }
std::uint64_t SymValue::structural_hash() const noexcept { return node_->hash; }

const StorageSlot& SymValue::slot() const {
    if (!node_->slot) throw std::logic_error("SymValue::slot on a non-SLOAD value");
    return *node_->slot;
}

namespace {

void render_into(const SymValue& v, std::string& out, std::size_t max_len) {
    if (out.size() >= max_len) return;
    auto list = [&](std::string_view head) {
        out += head;
        out += '(';
        bool first = true;
        for (const auto& o : v.operands()) {
            if (!first) out += ", ";
            first = false;
            render_into(o, out, max_len);
            if (out.size() >= max_len) return;
        }
        out += ')';
    };
    switch (v.kind()) {
        case SymValue::Kind::kConcrete:
            out += "0x" + to_hex(v.value());
            break;
        case SymValue::Kind::kCaller:
            out += "CALLER";
            break;
        case SymValue::Kind::kCallValue:
            out += "CALLVALUE";
            break;
        case SymValue::Kind::kCallDataLoad:
            list("CALLDATALOAD");
            break;
        case SymValue::Kind::kSLoad:
            out += "SLOAD[" + v.slot().canonical_key() + "]";
            break;
        case SymValue::Kind::kSha3:
            list("SHA3");
            break;
        case SymValue::Kind::kOp:
            list(v.mnemonic());
            break;
        case SymValue::Kind::kOpaque:
            out += "opaque#" + std::to_string(v.opaque_id()) + ":" + std::string{v.mnemonic()};
            break;
    }
}

}  // namespace

std::string SymValue::render(std::size_t max_len) const {
    std::string out;
    render_into(*this, out, max_len);
    if (out.size() >= max_len) {
        out.resize(max_len);
        out += "...";
    }
    return out;
}

std::vector<StorageSlot> SymValue::sload_slots() const {
    std::vector<StorageSlot> out;
    std::unordered_set<const Node*> seen;
    std::vector<const SymValue*> work{this};
    while (!work.empty()) {
        const SymValue* v = work.back();
        work.pop_back();
        if (!seen.insert(v->node_.get()).second) continue;
        if (v->kind() == Kind::kSLoad) {
            const auto& s = v->slot();
            bool dup = false;
            for (const auto& e : out) dup = dup || e == s;
            if (!dup) out.push_back(s);
            continue;
        }
        const auto ops = v->operands();
        for (auto it = ops.rbegin(); it != ops.rend(); ++it) work.push_back(&*it);
    }
    return out;
}

bool structurally_equal(const SymValue& a, const SymValue& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.structural_hash() != b.structural_hash()) return false;
    if (a.kind() == SymValue::Kind::kConcrete) return a.value() == b.value();
    if (a.kind() == SymValue::Kind::kSLoad) return a.slot() == b.slot();
    if (a.mnemonic() != b.mnemonic() || a.opaque_id() != b.opaque_id()) return false;
    const auto ao = a.operands();
    const auto bo = b.operands();
    if (ao.size() != bo.size()) return false;
    for (std::size_t i = 0; i < ao.size(); ++i) {
        if (!structurally_equal(ao[i], bo[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// canonical_slot

namespace {

constexpr unsigned kHashedBases = 1024;
constexpr unsigned kMaxHashedOffset = 1u << 24;

//! keccak256(n) -> n for small base slots.
const std::map<u256, unsigned>& hashed_bases() {
    static const std::map<u256, unsigned> table = [] {
        std::map<u256, unsigned> t;
        for (unsigned n = 0; n < kHashedBases; ++n) {
            const bytes32 word = word_to_be(u256{n});
            t.emplace(word_from_be(keccak256(word)), n);
        }
        return t;
    }();
    return table;
}

//! Base n when value = keccak256(n) + small offset (compile-time folded
//! array data addresses).
std::optional<unsigned> folded_array_base(const u256& value) {
    if (value < kMaxHashedOffset) return std::nullopt;
    const auto& table = hashed_bases();
    auto it = table.upper_bound(value);
    if (it == table.begin()) return std::nullopt;
    --it;
    if (value - it->first >= kMaxHashedOffset) return std::nullopt;
    return it->second;
}

std::optional<StorageSlot> layout_slot(const SymValue& v, int depth) {
    if (depth > 16) return std::nullopt;
    switch (v.kind()) {
        case SymValue::Kind::kConcrete:
            if (auto base = folded_array_base(v.value())) {
                return StorageSlot::hashed(StorageSlot::state_variable(*base), StorageSlot::KeyShape::kArrayIndex);
            }
            return StorageSlot::state_variable(v.value());
        case SymValue::Kind::kSha3: {
            const auto pre = v.operands();
            if (pre.empty()) return std::nullopt;
            auto base = layout_slot(pre.back(), depth + 1);
            if (!base) return std::nullopt;
            if (pre.size() == 1) return StorageSlot::hashed(*base, StorageSlot::KeyShape::kArrayIndex);
            if (pre.size() == 2) return StorageSlot::hashed(*base, StorageSlot::KeyShape::kMappingKey);
            return StorageSlot::hashed(*base, StorageSlot::KeyShape::kOpaque);
        }
        case SymValue::Kind::kOp: {
            if (v.mnemonic() != "ADD") return std::nullopt;
            for (const auto& o : v.operands()) {
                if (o.kind() != SymValue::Kind::kSha3 && o.kind() != SymValue::Kind::kOp &&
                    o.kind() != SymValue::Kind::kConcrete) {
                    continue;
                }
                auto s = layout_slot(o, depth + 1);
                if (s && s->kind() == StorageSlot::Kind::kHashed) return s;
            }
            return std::nullopt;
        }
        default:
            return std::nullopt;
    }
}

}  // namespace

StorageSlot canonical_slot(const SymValue& value) {
    if (auto s = layout_slot(value, 0)) return *s;
    return StorageSlot::unknown(value.structural_hash());
}

}  // namespace ponzitrace::symexec
