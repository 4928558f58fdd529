#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "homesafe/appdsl.hpp"
#include "homesafe/catalog.hpp"
#include "homesafe/config.hpp"

namespace homesafe {

// "if <service>.<attr>=<value> then <role>.<attr>=<value>", one per line.
struct TriggerActionRule {
    int line = 0;
    std::string service;
    std::string trigger_attribute;
    std::string trigger_value;
    std::string role;
    std::string action_attribute;
    std::string action_value;
};

std::vector<TriggerActionRule> parse_rules(std::string_view text, const std::string& origin = "<rules>");

// Trigger service name -> capability, from lines "service <name> <capability>".
class ServiceMap {
public:
    static ServiceMap parse(std::string_view text, const std::string& origin);
    static const ServiceMap& standard();

    // The mapped capability, or the name itself when it is a capability.
    std::string capability_of(const std::string& service, const Catalog& catalog) const;

private:
    std::map<std::string, std::string> services_;
};

// The standard device catalog extended with the web-service capabilities.
const Catalog& ifttt_catalog();

// One app per rule, named rule<N> in rule order, with a trigger slot named
// after the service and an action slot named after the role. Throws
// BindError for unknown services or attributes.
std::vector<AppSpec> import_ifttt(std::string_view rules, const Catalog& catalog,
                                  const ServiceMap& services = ServiceMap::standard(),
                                  const std::string& origin = "<rules>");

// Adds the imported apps to the config, binding each trigger slot to the
// device carrying the service tag as a role and each action slot to every
// device carrying the action role.
void install_rules(SystemConfig& config, const std::vector<AppSpec>& apps);

} // namespace homesafe
