#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "homesafe/appdsl.hpp"
#include "homesafe/error.hpp"
#include "homesafe/explorer.hpp"
#include "oracle.hpp"

using namespace homesafe;

namespace {

struct Rig {
    SystemConfig config;
    SystemModel model;
    std::vector<SafetyProperty> props;

    explicit Rig(SystemConfig c, std::vector<std::string> ids = {})
        : config(std::move(c)), model(config, fixtures::instance_ids(config)),
          props(instantiate_properties(PropertyCatalog::standard(), config, ids)) {}

    ExplorationResult run(ExplorationConfig ec) const { return explore(model, props, ec); }
};

std::set<std::string> ids_of(const ExplorationResult& r) {
    std::set<std::string> out;
    for (const auto& v : r.violations) out.insert(v.property);
    return out;
}

// Sensors only, no apps, no properties.
const char* kSensorsOnly = "device c contactSensor\ndevice m motionSensor\ndevice p presenceSensor\n";

} // namespace

TEST_CASE("Alice's departure unlocks the door through the mode change") {
    Rig r(fixtures::config("alice"), {"door-locked-when-away"});
    ExplorationConfig ec;
    ec.max_events = 1;
    auto res = r.run(ec);
    REQUIRE(res.violations.size() == 1);
    const Violation& v = res.violations[0];
    CHECK(v.property == "door-locked-when-away");
    CHECK(v.apps == std::vector<std::string>{"AutoModeChange", "UnlockDoor"});
    std::vector<std::string> order;
    for (const auto& s : v.trace.steps) order.push_back(s.entity);
    auto at = [&](const std::string& who) { return std::find(order.begin(), order.end(), who) - order.begin(); };
    CHECK(at("alicePresence") < at("AutoModeChange.presenceHandler"));
    CHECK(at("AutoModeChange.presenceHandler") < at("location"));
    CHECK(at("location") < at("UnlockDoor.changedLocationMode"));
    CHECK(at("UnlockDoor.changedLocationMode") < at("frontDoor"));
    CHECK(at("frontDoor") < at("property"));
    CHECK(v.trace.verdict.rfind("VIOLATION door-locked-when-away: ", 0) == 0);
}

TEST_CASE("every reported counterexample replays to the same steps and state") {
    for (const auto& name : fixtures::config_names()) {
        CAPTURE(name);
        Rig r(fixtures::config(name));
        ExplorationConfig ec;
        ec.max_events = 2;
        ec.failures = true;
        ec.comm_failures = true;
        auto res = r.run(ec);
        for (const auto& v : res.violations) {
            CAPTURE(v.property);
            ReplayResult rr = replay(r.model, r.props, v.trace, ec);
            CHECK(rr.steps == v.trace.steps);
            CHECK(rr.state == v.witness);
            CHECK(std::count(rr.violated.begin(), rr.violated.end(), v.property) == 1);
        }
    }
}

TEST_CASE("replaying an empty trace leaves the initial state") {
    Rig r(fixtures::config("alice"));
    ReplayResult rr = replay(r.model, r.props, Trace{});
    CHECK(rr.state == r.model.initial_state());
    CHECK(rr.steps.empty());
    CHECK(rr.violated.empty());
}

TEST_CASE("a trace whose steps were altered diverges") {
    Rig r(fixtures::config("alice"), {"door-locked-when-away"});
    auto res = r.run({});
    REQUIRE_FALSE(res.violations.empty());
    Trace t = res.violations[0].trace;
    t.steps[1].action = "something else";
    CHECK_THROWS_AS(replay(r.model, r.props, t), DivergenceError);
    Trace bad = res.violations[0].trace;
    bad.steps.clear();
    bad.events[0].value = r.model.initial_state().physical[bad.events[0].var];
    CHECK_THROWS_AS(replay(r.model, r.props, bad), DivergenceError);
}

TEST_CASE("without apps the states are exactly the sensor vectors within K changes") {
    Rig r(fixtures::config_text(kSensorsOnly));
    for (int k = 1; k <= 4; ++k) {
        CAPTURE(k);
        // Brute force over value vectors: one event changes one sensed attribute.
        std::vector<int> sizes;
        std::vector<int> init;
        SystemState s0 = r.model.initial_state();
        for (std::size_t v = 0; v < r.model.vars().size(); ++v)
            if (r.model.vars()[v].sensed) {
                sizes.push_back(static_cast<int>(r.model.vars()[v].values.size()));
                init.push_back(s0.physical[v]);
            }
        std::set<std::vector<int>> seen{init}, frontier{init};
        for (int d = 0; d < k; ++d) {
            std::set<std::vector<int>> next;
            for (const auto& s : frontier)
                for (std::size_t i = 0; i < s.size(); ++i)
                    for (int x = 0; x < sizes[i]; ++x) {
                        if (x == s[i]) continue;
                        auto t = s;
                        t[i] = x;
                        if (seen.insert(t).second) next.insert(t);
                    }
            frontier = std::move(next);
        }
        ExplorationConfig ec;
        ec.max_events = k;
        ec.vary_all_sensors = true;
        CHECK(r.run(ec).stats.states == seen.size());
    }
}

TEST_CASE("without a store the search tree has b^K leaves, (2b)^K when reports can be lost") {
    Rig r(fixtures::config_text(kSensorsOnly));
    std::uint64_t b = 0;
    for (const auto& v : r.model.vars())
        if (v.sensed) b += v.values.size() - 1;
    for (int k = 1; k <= 3; ++k) {
        CAPTURE(k);
        std::uint64_t leaves = 1, lossy = 1;
        for (int i = 0; i < k; ++i) leaves *= b, lossy *= 2 * b;
        ExplorationConfig ec;
        ec.max_events = k;
        ec.vary_all_sensors = true;
        ec.store = StoreKind::None;
        CHECK(r.run(ec).stats.leaves == leaves);
        ec.comm_failures = true;
        ec.max_failures = k;
        CHECK(r.run(ec).stats.leaves == lossy);
    }
}

TEST_CASE("allowing failures never hides a violation") {
    for (const auto& name : fixtures::config_names()) {
        CAPTURE(name);
        Rig r(fixtures::config(name));
        ExplorationConfig ec;
        ec.max_events = 2;
        auto plain = ids_of(r.run(ec));
        ec.failures = true;
        auto offline = ids_of(r.run(ec));
        ec.comm_failures = true;
        auto both = ids_of(r.run(ec));
        CHECK(std::includes(offline.begin(), offline.end(), plain.begin(), plain.end()));
        CHECK(std::includes(both.begin(), both.end(), offline.begin(), offline.end()));
    }
}

TEST_CASE("the clock never runs backwards along a trace") {
    static const std::vector<AppSpec> lib = [] {
        auto apps = fixtures::library();
        apps.push_back(parse_app("app Timed { slot m: motionSensor one slot s: switch one "
                                 "on m.motion == active as moved { runIn(5, later); } "
                                 "on call as later { s.set(switch, off); } "
                                 "on schedule(7) as periodic { s.set(switch, on); } }",
                                 Catalog::standard()));
        return apps;
    }();
    SystemConfig c = load_config("device m motionSensor\ndevice s switch\napp T uses Timed { bind m = m; bind s = s; }\n",
                                 lib, Catalog::standard(), "<test>");
    SystemModel model(c, fixtures::instance_ids(c));
    int motion = model.var_of(model.find_device("m"), "motion");
    std::mt19937 rng(3);
    int ticks = 0;
    for (int walk = 0; walk < 50; ++walk) {
        Trace t;
        SystemState s = model.initial_state();
        for (int n = 0; n < 10; ++n) {
            ExternalEvent e;
            if (!s.timers.empty() && rng() % 2) {
                e.kind = ExternalEvent::Kind::Tick;
                ++ticks;
            } else {
                e.var = motion;
                e.value = 1 - s.physical[motion];
            }
            t.events.push_back(e);
            ReplayResult rr = replay(model, {}, t);
            CHECK(rr.state.clock >= s.clock);
            for (const auto& timer : rr.state.timers) CHECK(timer.due > rr.state.clock);
            s = rr.state;
        }
    }
    CHECK(ticks > 0);
}

TEST_CASE("MakeItSo leaves the door unlocked only when a device fails") {
    Rig r(fixtures::config("makeitso"));
    ExplorationConfig ec;
    ec.max_events = 2;
    CHECK(r.run(ec).violations.empty());
    ec.failures = true;
    ec.comm_failures = true;
    auto ids = ids_of(r.run(ec));
    CHECK(ids.count("door-locked-when-away"));
    CHECK(ids.count("unacknowledged-command"));
}

TEST_CASE("parallel exploration gives the same result as a single worker") {
    Rig r(fixtures::config("fivehome"));
    ExplorationConfig ec;
    ec.max_events = 3;
    ec.failures = true;
    auto one = r.run(ec);
    ec.jobs = 4;
    auto four = r.run(ec);
    CHECK(one.stats.states == four.stats.states);
    CHECK(one.stats.transitions == four.stats.transitions);
    REQUIRE(one.violations.size() == four.violations.size());
    for (std::size_t i = 0; i < one.violations.size(); ++i) {
        CHECK(one.violations[i].property == four.violations[i].property);
        CHECK(one.violations[i].apps == four.violations[i].apps);
        CHECK(one.violations[i].trace.steps == four.violations[i].trace.steps);
    }
}

TEST_CASE("bitstate search finds a subset of the exact violations") {
    for (const auto& name : fixtures::config_names()) {
        CAPTURE(name);
        Rig r(fixtures::config(name));
        ExplorationConfig ec;
        ec.max_events = 3;
        ec.failures = true;
        auto exact = ids_of(r.run(ec));
        ec.store = StoreKind::Bitstate;
        ec.bits = 1 << 20;
        auto bits = ids_of(r.run(ec));
        CHECK(std::includes(exact.begin(), exact.end(), bits.begin(), bits.end()));
    }
}

namespace {

std::vector<SafetyProperty> oracle_props(const SystemConfig& c) {
    std::vector<SafetyProperty> out;
    for (auto& p : instantiate_properties(PropertyCatalog::standard(), c, {}))
        if (p.kind() == PropertyKind::Invariant || p.kind() == PropertyKind::ConflictFree ||
            p.kind() == PropertyKind::RepeatFree)
            out.push_back(std::move(p));
    return out;
}

void agree_with_oracle(const SystemConfig& c, int max_k) {
    SystemModel model(c, fixtures::instance_ids(c));
    auto props = oracle_props(c);
    for (int k = 1; k <= max_k; ++k) {
        CAPTURE(k);
        ExplorationConfig ec;
        ec.max_events = k;
        ec.vary_all_sensors = true;
        auto mine = ids_of(explore(model, props, ec));
        auto theirs = oracle::violated_properties(c, props, k);
        CHECK(oracle::last_interleavings() > 0);
        CHECK(mine == theirs);
    }
}

} // namespace

TEST_CASE("the explorer agrees with the brute-force interpreter on small systems") {
    SUBCASE("dark") { agree_with_oracle(fixtures::config("dark"), 3); }
    SUBCASE("path") { agree_with_oracle(fixtures::config("path"), 3); }
    SUBCASE("alice") { agree_with_oracle(fixtures::config("alice"), 3); }
    SUBCASE("mixed") { agree_with_oracle(fixtures::config("mixed"), 2); }
    SUBCASE("night mode and lights") {
        agree_with_oracle(fixtures::config_text(
                              "device hallMotion motionSensor\ndevice hallLight switch\n"
                              "modes { Home, Away, Night } initial=Home\n"
                              "app GoodNight uses GoodNight { bind motionSensors = hallMotion; "
                              "bind switches = hallLight; param newMode = Night; }\n"
                              "app BigTurnOn uses BigTurnOn { bind switches = hallLight; }\n"),
                          3);
    }
}
