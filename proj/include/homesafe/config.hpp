#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "homesafe/appdsl.hpp"
#include "homesafe/catalog.hpp"

namespace homesafe {

struct DeviceDecl {
    std::string id;
    std::string capability;
    std::vector<std::string> roles;
    bool offline_candidate = false;
    std::map<std::string, std::string> initial; // attribute -> value

    bool has_role(std::string_view role) const;
};

struct AppInstance {
    std::string id;
    std::string app; // AppSpec name
    std::map<std::string, std::vector<std::string>> bindings; // slot -> device ids
    std::map<std::string, std::string> params;
};

// A deployed system: device inventory, installed app instances and the
// whitelists used by the information-flow properties.
struct SystemConfig {
    const Catalog* catalog = nullptr;
    std::vector<AppSpec> library; // app specs referenced by instances
    std::vector<DeviceDecl> devices;
    std::vector<AppInstance> apps;
    std::vector<std::string> contacts;
    std::vector<std::string> allowed;
    std::vector<std::string> modes{"Home", "Away", "Night"};
    std::string initial_mode = "Home";
    std::map<std::string, std::vector<std::string>> domains; // "cap.attr" -> values

    const DeviceDecl* find_device(std::string_view id) const;
    const AppInstance* find_app(std::string_view id) const;
    const AppSpec& spec_of(const AppInstance& inst) const;
    // Value domain of an attribute after configuration overrides.
    std::vector<std::string> domain_of(const std::string& capability, const AttributeSpec& attr) const;
    std::vector<const DeviceDecl*> devices_with_role(std::string_view role) const;

    // Checks bindings, parameter values, initial values and ids. Throws
    // ConfigError.
    void validate() const;
};

// Parses the line-oriented configuration format:
//
//   device <id> <capability> [role=<tag>[,<tag>]] [offline-candidate] (<attr>=<init>)*
//   domain <capability>.<attr> = { v1, v2, ... }
//   modes { Home, Away, Night } initial=Home
//   app <instance-id> uses <app-name> { bind <slot> = <id>[,<id>] ; param <name> = <value> ; }
//   contact <recipient>
//   allow <endpoint>
SystemConfig load_config(std::string_view source, const std::vector<AppSpec>& library,
                         const Catalog& catalog, const std::string& origin = "<config>");

std::string render_config(const SystemConfig& config);

} // namespace homesafe
