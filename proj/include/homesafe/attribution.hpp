#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homesafe/config.hpp"
#include "homesafe/explorer.hpp"
#include "homesafe/properties.hpp"

namespace homesafe {

// Bindings and parameter values for one installation of an app.
struct AppConfiguration {
    std::map<std::string, std::vector<std::string>> bindings;
    std::map<std::string, std::string> params;

    std::string describe() const; // "slot=a,b param=v"
    bool operator==(const AppConfiguration&) const = default;
};

struct EnumerationLimits {
    std::size_t cap = 512;
    std::uint64_t seed = 1;
};

// Every compatible binding of each slot (one device for "one" slots, every
// non-empty subset for "many" slots) combined with every enum parameter value
// and the minimum, median and maximum of numeric parameters. Above the cap a
// seeded sample is taken that still uses every option of every slot and
// parameter. Throws ConfigError when a slot has no compatible device.
std::vector<AppConfiguration> enumerate_configs(const AppSpec& app, const SystemConfig& inventory,
                                                const EnumerationLimits& limits = {});

enum class AttributionKind { Malicious, BadApp, Misconfiguration, Clean };

std::string_view to_string(AttributionKind kind);

enum class Outcome { Violating, Safe, Inconclusive };

struct ConfigOutcome {
    AppConfiguration config;
    Outcome outcome = Outcome::Safe;
    std::vector<std::string> properties; // violated, involving the app
    std::string error;                   // why the run was inconclusive
};

struct AttributionOptions {
    double threshold = 0.9;
    EnumerationLimits limits;
    ExplorationConfig explore;
    std::vector<std::string> props;
    const PropertyCatalog* catalog = nullptr;
};

struct Attribution {
    std::string app;
    AttributionKind verdict = AttributionKind::Clean;
    double phase1 = 0; // violating share alone
    double phase2 = 0; // violating share with the installed apps
    bool phase2_run = false;
    std::vector<ConfigOutcome> alone;
    std::vector<ConfigOutcome> joint;
    std::vector<AppConfiguration> safe_configs; // Misconfiguration only
    std::vector<std::string> notices;
};

// Checks the new app under every enumerated configuration, first alone with
// the inventory's devices and then together with the apps already installed
// in the inventory. Inconclusive runs count toward neither share.
Attribution attribute(const AppSpec& app, const SystemConfig& inventory, const AttributionOptions& options);

// Safe configurations and the VERDICT line; with `verbose` also the outcome
// of every configuration.
std::string render_attribution(const Attribution& a, bool verbose = false);

} // namespace homesafe
