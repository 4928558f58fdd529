#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace homesafe {

enum class StoreKind { Exact, Bitstate, None };

// Visited-state set. insert() returns whether the state was (or, for the
// bitstate store, appears to have been) seen before. Safe to call from
// several threads.
class StateStore {
public:
    virtual ~StateStore() = default;
    virtual bool insert(std::string_view state) = 0;
    virtual std::uint64_t inserted() const = 0; // states reported as new
};

class ExactStore final : public StateStore {
public:
    bool insert(std::string_view state) override;
    std::uint64_t inserted() const override;

private:
    mutable std::mutex mu_;
    std::unordered_set<std::string> seen_;
};

// k bit positions per state in an m-bit field, from double hashing. A state
// is reported as seen when all of its bits were already set, which can be
// wrong for a new state but never for an old one.
class BitstateStore final : public StateStore {
public:
    BitstateStore(std::uint64_t bits, int hashes);
    bool insert(std::string_view state) override;
    std::uint64_t inserted() const override { return inserted_.load(); }
    std::uint64_t bits() const { return mask_ + 1; }
    int hashes() const { return hashes_; }

private:
    std::vector<std::atomic<std::uint64_t>> words_;
    std::uint64_t mask_;
    int hashes_;
    std::atomic<std::uint64_t> inserted_{0};
};

// Remembers nothing; every state is new. Used to count raw search trees.
class NullStore final : public StateStore {
public:
    bool insert(std::string_view) override {
        ++inserted_;
        return false;
    }
    std::uint64_t inserted() const override { return inserted_.load(); }

private:
    std::atomic<std::uint64_t> inserted_{0};
};

std::unique_ptr<StateStore> make_store(StoreKind kind, std::uint64_t bits = 1ull << 24, int hashes = 3);

std::string_view to_string(StoreKind kind);
StoreKind parse_store_kind(std::string_view text);

} // namespace homesafe
