#include "homesafe/store.hpp"

#include <functional>

#include "homesafe/error.hpp"

namespace homesafe {

bool ExactStore::insert(std::string_view state) {
    std::lock_guard lock(mu_);
    return !seen_.emplace(state).second;
}

std::uint64_t ExactStore::inserted() const {
    std::lock_guard lock(mu_);
    return seen_.size();
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

BitstateStore::BitstateStore(std::uint64_t bits, int hashes) : hashes_(hashes) {
    if (bits < 64 || (bits & (bits - 1)) != 0)
        throw Error("bitstate size must be a power of two of at least 64 bits");
    if (hashes < 1) throw Error("bitstate hash count must be positive");
    mask_ = bits - 1;
    words_ = std::vector<std::atomic<std::uint64_t>>(bits / 64);
}

bool BitstateStore::insert(std::string_view state) {
    std::uint64_t h1 = mix(std::hash<std::string_view>{}(state));
    std::uint64_t h2 = mix(fnv1a(state)) | 1; // odd step visits distinct bits
    bool seen = true;
    for (int i = 0; i < hashes_; ++i) {
        std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) & mask_;
        std::uint64_t flag = 1ull << (bit & 63);
        std::uint64_t old = words_[bit >> 6].fetch_or(flag, std::memory_order_relaxed);
        if (!(old & flag)) seen = false;
    }
    if (!seen) ++inserted_;
    return seen;
}

std::unique_ptr<StateStore> make_store(StoreKind kind, std::uint64_t bits, int hashes) {
    switch (kind) {
    case StoreKind::Exact: return std::make_unique<ExactStore>();
    case StoreKind::Bitstate: return std::make_unique<BitstateStore>(bits, hashes);
    case StoreKind::None: return std::make_unique<NullStore>();
    }
    return nullptr;
}

std::string_view to_string(StoreKind kind) {
    switch (kind) {
    case StoreKind::Exact: return "exact";
    case StoreKind::Bitstate: return "bitstate";
    case StoreKind::None: return "none";
    }
    return "?";
}

StoreKind parse_store_kind(std::string_view text) {
    if (text == "exact") return StoreKind::Exact;
    if (text == "bitstate") return StoreKind::Bitstate;
    if (text == "none") return StoreKind::None;
    throw Error("unknown store '" + std::string(text) + "' (expected exact or bitstate)");
}

} // namespace homesafe
