#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "homesafe/error.hpp"
#include "homesafe/properties.hpp"

using namespace homesafe;

namespace {

struct Rig {
    SystemConfig config;
    SystemModel model;
    std::vector<SafetyProperty> props;
    std::vector<CompiledProperty> compiled;

    explicit Rig(SystemConfig c)
        : config(std::move(c)), model(config, fixtures::instance_ids(config)),
          props(instantiate_properties(PropertyCatalog::standard(), config, {})),
          compiled(compile_properties(model, props)) {}

    const CompiledProperty& prop(const std::string& id) const {
        for (const auto& c : compiled)
            if (c.property->id() == id) return c;
        throw std::runtime_error("no property " + id);
    }
    int var(const std::string& device, const std::string& attr) const {
        return model.var_of(model.find_device(device), attr);
    }
    int value(int var, const std::string& v) const { return model.vars()[var].index_of(v); }
};

} // namespace

TEST_CASE("the catalog holds the 45 properties") {
    const auto& all = PropertyCatalog::standard().properties();
    CHECK(all.size() == 45);
    std::size_t state = std::count_if(all.begin(), all.end(),
                                      [](const PropertyDef& d) { return d.kind == PropertyKind::Invariant; });
    CHECK(state == 38);
}

TEST_CASE("the main door property binds the lock and every presence sensor") {
    SystemConfig c = fixtures::config("inventory");
    auto ps = instantiate_properties(PropertyCatalog::standard(), c, {"door-locked-when-away"});
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].bindings.at("main-door") == std::vector<std::string>{"frontDoor"});
    CHECK(ps[0].bindings.at("occupancy") == std::vector<std::string>{"alicePresence", "bobPresence"});
    CHECK(ps[0].render() == "!(frontDoor.lock == unlocked && all(alicePresence,bobPresence).presence == not_present)");
}

TEST_CASE("properties whose roles have no device are skipped with a notice") {
    std::vector<std::string> notices;
    auto ps = instantiate_properties(PropertyCatalog::standard(), fixtures::config("alice"), {}, &notices);
    CHECK(std::none_of(ps.begin(), ps.end(), [](const SafetyProperty& p) { return p.id() == "siren-not-activated"; }));
    CHECK(std::any_of(notices.begin(), notices.end(),
                      [](const std::string& n) { return n.find("siren-not-activated") != std::string::npos; }));
}

TEST_CASE("a heater and an AC give the both-on invariant") {
    auto ps = instantiate_properties(PropertyCatalog::standard(), fixtures::config("thermostat"), {"heater-ac-both-on"});
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].render() == "!(heaterOutlet.switch == on && acOutlet.switch == on)");
}

TEST_CASE("a unique role on two devices is ambiguous") {
    SystemConfig c = fixtures::config_text("device a lock role=main-door\ndevice b lock role=main-door\n"
                                           "device p presenceSensor role=occupancy\n");
    CHECK_THROWS_AS(instantiate_properties(PropertyCatalog::standard(), c, {"door-locked-when-away"}), ConfigError);
    CHECK_THROWS_AS(instantiate_properties(PropertyCatalog::standard(), c, {"no-such-property"}), ConfigError);
}

TEST_CASE("command log checks") {
    Rig r(fixtures::config("dark"));
    int sw = r.var("hallLight", "switch");
    SystemState s = r.model.initial_state();
    auto cmd = [&](const std::string& v) { return CommandRecord{sw, r.value(sw, v), 0, true, 0}; };

    SUBCASE("on then off in one cascade is a conflict") {
        CascadeRecord rec{{cmd("on"), cmd("off")}, {}};
        CHECK_FALSE(check(r.prop("conflicting-commands"), r.model, s, rec).ok);
        CHECK(check(r.prop("repeated-commands"), r.model, s, rec).ok);
    }
    SUBCASE("on twice is a repeat") {
        CascadeRecord rec{{cmd("on"), cmd("on")}, {}};
        CHECK_FALSE(check(r.prop("repeated-commands"), r.model, s, rec).ok);
        CHECK(check(r.prop("conflicting-commands"), r.model, s, rec).ok);
    }
    SUBCASE("an empty log passes everything") {
        CascadeRecord rec;
        for (const auto& p : r.compiled) CHECK(check(p, r.model, s, rec).ok);
    }
    SUBCASE("an undelivered command needs a later message") {
        CommandRecord lost = cmd("on");
        lost.delivered = false;
        CascadeRecord rec{{lost}, {}};
        CHECK_FALSE(check(r.prop("unacknowledged-command"), r.model, s, rec).ok);
        rec.actions.push_back({ActionRecord::Kind::Sms, 0, "owner", false, 1});
        CHECK(check(r.prop("unacknowledged-command"), r.model, s, rec).ok);
    }
}

TEST_CASE("information-flow checks") {
    Rig r(fixtures::config("inventory"));
    SystemState s = r.model.initial_state();
    auto verdict = [&](const std::string& id, ActionRecord a) {
        return check(r.prop(id), r.model, s, CascadeRecord{{}, {a}}).ok;
    };
    CHECK_FALSE(verdict("network-leakage", {ActionRecord::Kind::Post, 0, "http://evil.example/x", false, 0}));
    CHECK(verdict("network-leakage", {ActionRecord::Kind::Post, 0, "http://weather.example/forecast", false, 0}));
    CHECK_FALSE(verdict("sms-leakage", {ActionRecord::Kind::Sms, 0, "stranger", false, 0}));
    CHECK(verdict("sms-leakage", {ActionRecord::Kind::Sms, 0, "owner", false, 0}));
    CHECK_FALSE(verdict("unsubscribe-command", {ActionRecord::Kind::Unsubscribe, 0, "A.h", false, 0}));
    CHECK_FALSE(verdict("fake-event", {ActionRecord::Kind::Raise, 0, "kitchenSmoke.smoke=detected", true, 0}));
    CHECK(verdict("fake-event", {ActionRecord::Kind::Raise, 0, "kitchenSmoke.smoke=detected", false, 0}));
}

TEST_CASE("each verdict depends only on its own inputs") {
    Rig r(fixtures::config("inventory"));
    int door = r.var("frontDoor", "lock");
    int light = r.var("hallLight", "switch");
    SystemState safe = r.model.initial_state();
    SystemState unsafe = safe;
    unsafe.reported[door] = unsafe.physical[door] = static_cast<std::uint8_t>(r.value(door, "unlocked"));
    for (const char* who : {"alicePresence", "bobPresence"}) {
        int p = r.var(who, "presence");
        unsafe.reported[p] = unsafe.physical[p] = static_cast<std::uint8_t>(r.value(p, "not_present"));
    }
    CascadeRecord quiet;
    CascadeRecord noisy{{{light, r.value(light, "on"), 0, true, 0}, {light, r.value(light, "off"), 0, false, 1}},
                        {{ActionRecord::Kind::Post, 0, "http://evil.example/x", false, 2},
                         {ActionRecord::Kind::Sms, 0, "stranger", false, 2}}};

    const auto& inv = r.prop("door-locked-when-away");
    CHECK(check(inv, r.model, safe, quiet).ok == check(inv, r.model, safe, noisy).ok);
    CHECK(check(inv, r.model, unsafe, quiet).ok == check(inv, r.model, unsafe, noisy).ok);
    CHECK_FALSE(check(inv, r.model, unsafe, quiet).ok);

    for (const char* id : {"conflicting-commands", "repeated-commands", "network-leakage", "sms-leakage",
                           "unacknowledged-command"}) {
        CAPTURE(id);
        const auto& p = r.prop(id);
        CHECK(check(p, r.model, safe, noisy).ok == check(p, r.model, unsafe, noisy).ok);
        CHECK(check(p, r.model, safe, quiet).ok == check(p, r.model, unsafe, quiet).ok);
    }
    // Leakage ignores the command log, command checks ignore the actions.
    CascadeRecord only_actions{{}, noisy.actions};
    CascadeRecord only_commands{noisy.commands, {}};
    CHECK(check(r.prop("network-leakage"), r.model, safe, noisy).ok ==
          check(r.prop("network-leakage"), r.model, safe, only_actions).ok);
    CHECK(check(r.prop("conflicting-commands"), r.model, safe, noisy).ok ==
          check(r.prop("conflicting-commands"), r.model, safe, only_commands).ok);
    // Evaluation order does not matter.
    std::vector<bool> forward, backward;
    for (const auto& p : r.compiled) forward.push_back(check(p, r.model, unsafe, noisy).ok);
    for (auto it = r.compiled.rbegin(); it != r.compiled.rend(); ++it)
        backward.push_back(check(*it, r.model, unsafe, noisy).ok);
    std::reverse(backward.begin(), backward.end());
    CHECK(forward == backward);
}
