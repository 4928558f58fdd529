#include "homesafe/ifttt.hpp"

#include <fstream>
#include <sstream>

#include "homesafe/error.hpp"
#include "homesafe/lexer.hpp"

namespace homesafe {

std::vector<TriggerActionRule> parse_rules(std::string_view text, const std::string& origin) {
    std::vector<TriggerActionRule> rules;
    TokenStream ts(tokenize(text, origin), origin);
    auto value = [&](const std::string& what) {
        if (ts.peek().kind == TokenKind::Number) return ts.next().text;
        return ts.expect_ident(what);
    };
    while (!ts.at_end()) {
        TriggerActionRule r;
        r.line = ts.peek().line;
        ts.expect_keyword("if");
        r.service = ts.expect_ident("trigger service");
        ts.expect_punct(".");
        r.trigger_attribute = ts.expect_ident("trigger attribute");
        ts.expect_punct("=");
        r.trigger_value = value("trigger value");
        ts.expect_keyword("then");
        r.role = ts.expect_ident("action role");
        ts.expect_punct(".");
        r.action_attribute = ts.expect_ident("action attribute");
        ts.expect_punct("=");
        r.action_value = value("action value");
        rules.push_back(std::move(r));
    }
    return rules;
}

ServiceMap ServiceMap::parse(std::string_view text, const std::string& origin) {
    ServiceMap map;
    TokenStream ts(tokenize(text, origin), origin);
    while (!ts.at_end()) {
        ts.expect_keyword("service");
        std::string name = ts.expect_ident("service name");
        map.services_[name] = ts.expect_ident("capability");
    }
    return map;
}

const ServiceMap& ServiceMap::standard() {
    static const ServiceMap map = [] {
        std::string path = Catalog::data_dir() + "/ifttt.map";
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }();
    return map;
}

std::string ServiceMap::capability_of(const std::string& service, const Catalog& catalog) const {
    auto it = services_.find(service);
    if (it != services_.end()) return it->second;
    if (catalog.find(service)) return service;
    throw BindError("unknown trigger service '" + service + "'");
}

const Catalog& ifttt_catalog() {
    static const Catalog catalog = [] {
        Catalog c = Catalog::standard();
        c.merge(Catalog::load_file(Catalog::data_dir() + "/ifttt.cat"));
        return c;
    }();
    return catalog;
}

namespace {

std::string slot_name(std::string s) {
    for (char& c : s)
        if (c == '-') c = '_';
    return s;
}

std::string action_capability(const TriggerActionRule& r, const Catalog& catalog, const std::string& where) {
    std::string found;
    for (const Capability* cap : catalog.with_attribute(r.action_attribute)) {
        const AttributeSpec* a = cap->find(r.action_attribute);
        if (!a || a->access != AttrAccess::Commanded || cap->name == kLocationCapability) continue;
        if (!found.empty())
            throw BindError(where + ": attribute '" + r.action_attribute + "' is commanded by both '" + found +
                            "' and '" + cap->name + "'");
        found = cap->name;
    }
    if (found.empty()) throw BindError(where + ": no device capability accepts '" + r.action_attribute + "' commands");
    return found;
}

} // namespace

std::vector<AppSpec> import_ifttt(std::string_view rules, const Catalog& catalog, const ServiceMap& services,
                                  const std::string& origin) {
    std::vector<AppSpec> apps;
    int n = 0;
    for (const auto& r : parse_rules(rules, origin)) {
        ++n;
        std::string where = origin + ":" + std::to_string(r.line);
        std::string trigger_cap = services.capability_of(r.service, catalog);
        std::string action_cap = action_capability(r, catalog, where);
        std::string trigger_slot = slot_name(r.service);
        std::string action_slot = slot_name(r.role);
        if (action_slot == trigger_slot) action_slot += "_target";

        std::string name = "rule" + std::to_string(n);
        std::string text = "app " + name + " {\n" +
                           "  description \"if " + r.service + "." + r.trigger_attribute + "=" + r.trigger_value +
                           " then " + r.role + "." + r.action_attribute + "=" + r.action_value + "\"\n" +
                           "  slot " + trigger_slot + ": " + trigger_cap + " one\n" +
                           "  slot " + action_slot + ": " + action_cap + " many\n" +
                           "  on " + trigger_slot + "." + r.trigger_attribute + " == " + r.trigger_value +
                           " as trigger {\n" +
                           "    " + action_slot + ".set(" + r.action_attribute + ", " + r.action_value + ");\n" +
                           "  }\n}\n";
        apps.push_back(parse_app(text, catalog, where));
    }
    return apps;
}

void install_rules(SystemConfig& config, const std::vector<AppSpec>& apps) {
    for (const auto& app : apps) {
        AppInstance inst;
        inst.id = app.name;
        inst.app = app.name;
        for (const auto& slot : app.slots) {
            std::vector<std::string> ids;
            std::string role = slot.name;
            if (role.size() > 7 && role.ends_with("_target")) role.resize(role.size() - 7);
            for (const DeviceDecl* d : config.devices_with_role(role)) ids.push_back(d->id);
            if (ids.empty()) {
                // Role tags keep their hyphens; slot names cannot.
                std::string hyphen = role;
                for (char& c : hyphen)
                    if (c == '_') c = '-';
                for (const DeviceDecl* d : config.devices_with_role(hyphen)) ids.push_back(d->id);
            }
            if (ids.empty())
                throw ConfigError(app.name + ": no device has role '" + role + "' for slot '" + slot.name + "'");
            if (slot.multiplicity == Multiplicity::One && ids.size() > 1)
                throw ConfigError(app.name + ": several devices have role '" + role + "'");
            inst.bindings[slot.name] = ids;
        }
        config.library.push_back(app);
        config.apps.push_back(std::move(inst));
    }
}

} // namespace homesafe
