#include <doctest.h>

#include "fixtures.hpp"
#include "homesafe/appdsl.hpp"
#include "homesafe/error.hpp"
#include "homesafe/model.hpp"

using namespace homesafe;

namespace {

struct Rig {
    SystemConfig config;
    SystemModel model;

    explicit Rig(SystemConfig c) : config(std::move(c)), model(config, fixtures::instance_ids(config)) {}

    int var(const std::string& device, const std::string& attr) const {
        return model.var_of(model.find_device(device), attr);
    }
    int value(int var, const std::string& v) const { return model.vars()[var].index_of(v); }
};

// A system with a subscriber on the lock so actuator notifications are visible.
SystemConfig lock_watch_config() {
    static const std::vector<AppSpec> lib = [] {
        auto apps = fixtures::library();
        apps.push_back(parse_app("app LockWatch { slot l: lock one slot s: switch one "
                                 "on l.lock as changed { s.set(switch, on); } }",
                                 Catalog::standard()));
        return apps;
    }();
    return load_config("device p presenceSensor\ndevice d lock\ndevice s switch\n"
                       "app AutoModeChange uses AutoModeChange { bind people = p; param awayMode = Away; "
                       "param homeMode = Home; }\n"
                       "app W uses LockWatch { bind l = d; bind s = s; }\n",
                       lib, Catalog::standard(), "<test>");
}

} // namespace

TEST_CASE("a presence change updates the sensor and notifies its subscribers") {
    Rig r(fixtures::config("alice"));
    SystemState s = r.model.initial_state();
    int p = r.var("alicePresence", "presence");
    auto notes = sensor_state_update(r.model, s, p, r.value(p, "not_present"));
    CHECK(s.reported[p] == r.value(p, "not_present"));
    CHECK(s.physical[p] == r.value(p, "not_present"));
    REQUIRE(notes.size() == 1);
    CHECK(r.model.handler_label(notes[0].handler) == "AutoModeChange.presenceHandler");
}

TEST_CASE("a sensor update to the current value is a no-op") {
    Rig r(fixtures::config("alice"));
    SystemState s = r.model.initial_state();
    SystemState before = s;
    int p = r.var("alicePresence", "presence");
    auto notes = sensor_state_update(r.model, s, p, s.reported[p]);
    CHECK(notes.empty());
    CHECK(s == before);
}

TEST_CASE("an offline sensor does not change its reported state or notify") {
    Rig r(fixtures::config("alice"));
    SystemState s = r.model.initial_state();
    int p = r.var("alicePresence", "presence");
    s.offline[r.model.find_device("alicePresence")] = 1;
    int old = s.reported[p];
    auto notes = sensor_state_update(r.model, s, p, r.value(p, "not_present"));
    CHECK(notes.empty());
    CHECK(s.reported[p] == old);
}

TEST_CASE("a lock command changes the lock and notifies its subscribers") {
    Rig r(lock_watch_config());
    SystemState s = r.model.initial_state();
    std::vector<CommandRecord> log;
    int l = r.var("d", "lock");
    auto notes = actuator_state_update(r.model, s, log, l, r.value(l, "unlocked"));
    CHECK(s.reported[l] == r.value(l, "unlocked"));
    REQUIRE(log.size() == 1);
    CHECK(log[0].delivered);
    REQUIRE(notes.size() == 1);
    CHECK(r.model.handler_label(notes[0].handler) == "W.changed");
}

TEST_CASE("a redundant command is logged but changes nothing") {
    Rig r(lock_watch_config());
    SystemState s = r.model.initial_state();
    std::vector<CommandRecord> log;
    int sw = r.var("s", "switch");
    actuator_state_update(r.model, s, log, sw, r.value(sw, "on"));
    SystemState before = s;
    auto notes = actuator_state_update(r.model, s, log, sw, r.value(sw, "on"));
    CHECK(notes.empty());
    CHECK(log.size() == 2);
    CHECK(s == before);
}

TEST_CASE("a command to an offline lock is logged and has no effect") {
    Rig r(lock_watch_config());
    SystemState s = r.model.initial_state();
    int l = r.var("d", "lock");
    s.offline[r.model.find_device("d")] = 1;
    SystemState before = s;
    std::vector<CommandRecord> log;
    auto notes = actuator_state_update(r.model, s, log, l, r.value(l, "unlocked"));
    CHECK(notes.empty());
    REQUIRE(log.size() == 1);
    CHECK_FALSE(log[0].delivered);
    CHECK(s == before);
}

TEST_CASE("values outside the domain are rejected") {
    Rig r(fixtures::config("alice"));
    SystemState s = r.model.initial_state();
    std::vector<CommandRecord> log;
    int p = r.var("alicePresence", "presence");
    int l = r.var("frontDoor", "lock");
    CHECK_THROWS_AS(sensor_state_update(r.model, s, p, 7), ConfigError);
    CHECK_THROWS_AS(actuator_state_update(r.model, s, log, l, -1), ConfigError);
    CHECK_THROWS_AS(sensor_state_update(r.model, s, l, 1), ConfigError);
}

TEST_CASE("an update only changes the addressed device and is deterministic") {
    for (const auto& name : fixtures::config_names()) {
        CAPTURE(name);
        Rig r(fixtures::config(name));
        const SystemState init = r.model.initial_state();
        for (std::size_t v = 0; v < r.model.vars().size(); ++v) {
            const VarInfo& info = r.model.vars()[v];
            for (std::size_t x = 0; x < info.values.size(); ++x) {
                SystemState a = init, b = init;
                std::vector<CommandRecord> la, lb;
                std::vector<Notification> na, nb;
                if (info.sensed) {
                    na = sensor_state_update(r.model, a, static_cast<int>(v), static_cast<int>(x));
                    nb = sensor_state_update(r.model, b, static_cast<int>(v), static_cast<int>(x));
                } else {
                    na = actuator_state_update(r.model, a, la, static_cast<int>(v), static_cast<int>(x));
                    nb = actuator_state_update(r.model, b, lb, static_cast<int>(v), static_cast<int>(x));
                }
                CHECK(a == b);
                REQUIRE(na.size() == nb.size());
                for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].handler == nb[i].handler);
                for (std::size_t w = 0; w < r.model.vars().size(); ++w) {
                    if (r.model.vars()[w].device == info.device) continue;
                    CHECK(a.reported[w] == init.reported[w]);
                    CHECK(a.physical[w] == init.physical[w]);
                }
            }
        }
    }
}

TEST_CASE("an offline device behaves like one that drops every message") {
    Rig r(lock_watch_config());
    int dev = r.model.find_device("d");
    int l = r.var("d", "lock");
    SystemState off = r.model.initial_state();
    off.offline[dev] = 1;
    SystemState dropping = r.model.initial_state();
    std::vector<CommandRecord> log_off, log_drop;
    for (int value : {r.value(l, "unlocked"), r.value(l, "locked"), r.value(l, "unlocked")}) {
        auto n1 = actuator_state_update(r.model, off, log_off, l, value, true);
        auto n2 = actuator_state_update(r.model, dropping, log_drop, l, value, false);
        CHECK(n1.size() == n2.size());
        CHECK(off.reported == dropping.reported);
        CHECK(off.physical == dropping.physical);
    }
    REQUIRE(log_off.size() == log_drop.size());
    for (std::size_t i = 0; i < log_off.size(); ++i) CHECK(log_off[i].delivered == log_drop[i].delivered);
}

TEST_CASE("canonical states distinguish every component") {
    Rig r(fixtures::config("alice"));
    SystemState a = r.model.initial_state();
    std::string base = a.canonical();
    SystemState b = a;
    b.offline[0] = 1;
    CHECK(b.canonical() != base);
    b = a;
    b.clock = 3;
    CHECK(b.canonical() != base);
    b = a;
    b.failures = 1;
    CHECK(b.canonical() != base);
    b = a;
    b.reported[0] ^= 1;
    CHECK(b.canonical() != base);
    CHECK(r.model.initial_state().canonical() == base);
}
