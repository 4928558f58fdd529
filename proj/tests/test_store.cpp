#include <doctest.h>

#include <random>
#include <string>
#include <thread>

#include "homesafe/error.hpp"
#include "homesafe/store.hpp"

using namespace homesafe;

TEST_CASE("the exact store reports only repeated states as seen") {
    ExactStore s;
    CHECK_FALSE(s.insert("a"));
    CHECK_FALSE(s.insert("b"));
    CHECK(s.insert("a"));
    CHECK_FALSE(s.insert(std::string("\0a", 2)));
    CHECK(s.inserted() == 3);
}

TEST_CASE("the bitstate store never forgets a state") {
    BitstateStore s(1 << 12, 3);
    CHECK(s.bits() == 4096);
    for (int i = 0; i < 200; ++i) s.insert("state" + std::to_string(i));
    for (int i = 0; i < 200; ++i) CHECK(s.insert("state" + std::to_string(i)));
}

TEST_CASE("the null store treats every state as new") {
    NullStore s;
    CHECK_FALSE(s.insert("a"));
    CHECK_FALSE(s.insert("a"));
    CHECK(s.inserted() == 2);
}

TEST_CASE("bitstate false positives stay below 1% at 2^20 bits and 3 hashes") {
    // Expected rate (1 - e^(-kn/m))^k is about 2e-5 for n = 10^4.
    BitstateStore bits(1 << 20, 3);
    ExactStore exact;
    std::mt19937_64 rng(7);
    int fresh = 0, wrong = 0;
    while (fresh < 10000) {
        std::string state(24, '\0');
        for (auto& c : state) c = static_cast<char>(rng());
        if (exact.insert(state)) continue;
        ++fresh;
        if (bits.insert(state)) ++wrong;
    }
    CHECK(static_cast<double>(wrong) / fresh < 0.01);
}

TEST_CASE("concurrent inserts count each state once") {
    ExactStore s;
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
        ts.emplace_back([&] {
            for (int i = 0; i < 1000; ++i) s.insert(std::to_string(i));
        });
    for (auto& t : ts) t.join();
    CHECK(s.inserted() == 1000);
}

TEST_CASE("store kinds parse and reject unknown names") {
    CHECK(parse_store_kind("exact") == StoreKind::Exact);
    CHECK(parse_store_kind("bitstate") == StoreKind::Bitstate);
    CHECK(to_string(StoreKind::Bitstate) == "bitstate");
    CHECK_THROWS_AS(parse_store_kind("fuzzy"), Error);
}
