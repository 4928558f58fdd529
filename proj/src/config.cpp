#include "homesafe/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "homesafe/error.hpp"
#include "homesafe/lexer.hpp"

namespace homesafe {

bool DeviceDecl::has_role(std::string_view role) const {
    return std::find(roles.begin(), roles.end(), role) != roles.end();
}

const DeviceDecl* SystemConfig::find_device(std::string_view id) const {
    for (const auto& d : devices)
        if (d.id == id) return &d;
    return nullptr;
}

const AppInstance* SystemConfig::find_app(std::string_view id) const {
    for (const auto& a : apps)
        if (a.id == id) return &a;
    return nullptr;
}

const AppSpec& SystemConfig::spec_of(const AppInstance& inst) const {
    for (const auto& s : library)
        if (s.name == inst.app) return s;
    throw ConfigError("app instance '" + inst.id + "' uses unknown app '" + inst.app + "'");
}

std::vector<std::string> SystemConfig::domain_of(const std::string& capability,
                                                 const AttributeSpec& attr) const {
    if (capability == kLocationCapability && attr.name == kModeAttribute) return modes;
    auto it = domains.find(capability + "." + attr.name);
    if (it != domains.end()) return it->second;
    return attr.domain;
}

std::vector<const DeviceDecl*> SystemConfig::devices_with_role(std::string_view role) const {
    std::vector<const DeviceDecl*> out;
    for (const auto& d : devices)
        if (d.has_role(role)) out.push_back(&d);
    return out;
}

namespace {

bool in(const std::vector<std::string>& values, const std::string& v) {
    return std::find(values.begin(), values.end(), v) != values.end();
}

bool same_number(const std::string& a, const std::string& b) {
    try {
        return std::stol(a) == std::stol(b);
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

void SystemConfig::validate() const {
    if (!catalog) throw ConfigError("configuration has no capability catalog");
    if (modes.empty()) throw ConfigError("mode set is empty");
    if (!in(modes, initial_mode)) throw ConfigError("initial mode '" + initial_mode + "' is not a declared mode");

    std::set<std::string> ids;
    for (const auto& d : devices) {
        if (d.id == kLocationSlot) throw ConfigError("device id 'location' is reserved");
        if (!ids.insert(d.id).second) throw ConfigError("duplicate device id '" + d.id + "'");
        const Capability* cap = catalog->find(d.capability);
        if (!cap) throw ConfigError("device '" + d.id + "': unknown capability '" + d.capability + "'");
        for (const auto& [attr, value] : d.initial) {
            const AttributeSpec* spec = cap->find(attr);
            if (!spec)
                throw ConfigError("device '" + d.id + "': capability '" + d.capability +
                                  "' has no attribute '" + attr + "'");
            if (!in(domain_of(d.capability, *spec), value))
                throw ConfigError("device '" + d.id + "': initial value '" + value +
                                  "' is outside the domain of '" + attr + "'");
        }
    }
    for (const auto& [key, values] : domains) {
        if (values.empty()) throw ConfigError("domain '" + key + "' is empty");
        auto dot = key.find('.');
        const Capability* cap = catalog->find(key.substr(0, dot));
        const AttributeSpec* attr = cap ? cap->find(key.substr(dot + 1)) : nullptr;
        if (!attr) throw ConfigError("domain for unknown attribute '" + key + "'");
    }

    std::set<std::string> app_ids;
    for (const auto& inst : apps) {
        if (!app_ids.insert(inst.id).second) throw ConfigError("duplicate app instance '" + inst.id + "'");
        const AppSpec& spec = spec_of(inst);
        for (const auto& [slot, devs] : inst.bindings)
            if (!spec.find_slot(slot))
                throw ConfigError("app '" + inst.id + "': '" + spec.name + "' has no slot '" + slot + "'");
        for (const auto& slot : spec.slots) {
            auto it = inst.bindings.find(slot.name);
            if (it == inst.bindings.end() || it->second.empty())
                throw ConfigError("app '" + inst.id + "': slot '" + slot.name + "' is not bound");
            if (slot.multiplicity == Multiplicity::One && it->second.size() != 1)
                throw ConfigError("app '" + inst.id + "': slot '" + slot.name + "' takes exactly one device");
            std::set<std::string> seen;
            for (const auto& dev : it->second) {
                const DeviceDecl* d = find_device(dev);
                if (!d) throw ConfigError("app '" + inst.id + "': unknown device '" + dev + "'");
                if (!seen.insert(dev).second)
                    throw ConfigError("app '" + inst.id + "': device '" + dev + "' bound twice to '" + slot.name + "'");
                if (d->capability != slot.capability)
                    throw ConfigError("app '" + inst.id + "': device '" + dev + "' (" + d->capability +
                                      ") does not provide capability '" + slot.capability +
                                      "' required by slot '" + slot.name + "'");
            }
        }
        for (const auto& [name, value] : inst.params) {
            const ParamDecl* p = spec.find_param(name);
            if (!p) throw ConfigError("app '" + inst.id + "': '" + spec.name + "' has no parameter '" + name + "'");
            bool ok = p->numeric ? std::any_of(p->domain.begin(), p->domain.end(),
                                               [&](const std::string& d) { return same_number(d, value); })
                                 : in(p->domain, value);
            if (!ok)
                throw ConfigError("app '" + inst.id + "': value '" + value + "' is outside the domain of parameter '" +
                                  name + "'");
        }
        for (const auto& p : spec.params)
            if (!inst.params.count(p.name))
                throw ConfigError("app '" + inst.id + "': parameter '" + p.name + "' has no value");
    }
}

SystemConfig load_config(std::string_view source, const std::vector<AppSpec>& library,
                         const Catalog& catalog, const std::string& origin) {
    TokenStream ts(tokenize(source, origin), origin);
    SystemConfig cfg;
    cfg.catalog = &catalog;
    std::set<std::string> used_apps;

    auto word = [&](std::string_view what) {
        const Token& t = ts.peek();
        if (t.kind == TokenKind::Ident || t.kind == TokenKind::Number || t.kind == TokenKind::String)
            return ts.next().text;
        ts.fail("unexpected " + describe(t), {std::string(what)});
    };

    while (!ts.at_end()) {
        const Token& head = ts.peek();
        if (ts.accept_keyword("device")) {
            DeviceDecl d;
            d.id = ts.expect_ident("device id");
            d.capability = ts.expect_ident("capability");
            // Settings and flags run until the next declaration keyword.
            for (;;) {
                if (ts.accept_keyword("offline-candidate")) {
                    d.offline_candidate = true;
                } else if (ts.peek().kind == TokenKind::Ident && ts.is_punct("=", 1)) {
                    std::string key = ts.next().text;
                    ts.next();
                    if (key == "role") {
                        do {
                            d.roles.push_back(ts.expect_ident("role tag"));
                        } while (ts.accept_punct(","));
                    } else {
                        d.initial[key] = word("value");
                    }
                } else {
                    break;
                }
            }
            cfg.devices.push_back(std::move(d));
        } else if (ts.accept_keyword("domain")) {
            std::string cap = ts.expect_ident("capability");
            ts.expect_punct(".");
            std::string attr = ts.expect_ident("attribute");
            ts.expect_punct("=");
            ts.expect_punct("{");
            std::vector<std::string> values;
            do {
                values.push_back(word("value"));
            } while (ts.accept_punct(","));
            ts.expect_punct("}");
            cfg.domains[cap + "." + attr] = std::move(values);
        } else if (ts.accept_keyword("modes")) {
            ts.expect_punct("{");
            cfg.modes.clear();
            do {
                cfg.modes.push_back(ts.expect_ident("mode"));
            } while (ts.accept_punct(","));
            ts.expect_punct("}");
            cfg.initial_mode = cfg.modes.front();
            if (ts.accept_keyword("initial")) {
                ts.expect_punct("=");
                cfg.initial_mode = ts.expect_ident("mode");
            }
        } else if (ts.accept_keyword("app")) {
            AppInstance inst;
            inst.id = ts.expect_ident("app instance id");
            ts.expect_keyword("uses");
            const Token& app_tok = ts.peek();
            inst.app = ts.expect_ident("app name");
            auto spec = std::find_if(library.begin(), library.end(),
                                     [&](const AppSpec& a) { return a.name == inst.app; });
            if (spec == library.end())
                throw ConfigError(origin + ":" + std::to_string(app_tok.line) + ": unknown app '" + inst.app + "'");
            if (used_apps.insert(inst.app).second) cfg.library.push_back(*spec);
            ts.expect_punct("{");
            while (!ts.accept_punct("}")) {
                if (ts.accept_keyword("bind")) {
                    std::string slot = ts.expect_ident("slot");
                    ts.expect_punct("=");
                    auto& devs = inst.bindings[slot];
                    do {
                        devs.push_back(ts.expect_ident("device id"));
                    } while (ts.accept_punct(","));
                } else if (ts.accept_keyword("param")) {
                    std::string name = ts.expect_ident("parameter");
                    ts.expect_punct("=");
                    inst.params[name] = word("value");
                } else {
                    ts.fail("unexpected " + describe(ts.peek()), {"bind", "param", "'}'"});
                }
                ts.accept_punct(";");
            }
            cfg.apps.push_back(std::move(inst));
        } else if (ts.accept_keyword("contact")) {
            cfg.contacts.push_back(word("recipient"));
        } else if (ts.accept_keyword("allow")) {
            cfg.allowed.push_back(word("endpoint"));
        } else {
            ts.fail_at(head, "unexpected " + describe(head),
                       {"device", "domain", "modes", "app", "contact", "allow"});
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

std::string render_config(const SystemConfig& cfg) {
    auto quote_if_needed = [](const std::string& s) {
        bool plain = !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') plain = false;
        return plain ? s : "\"" + s + "\"";
    };
    std::string out;
    for (const auto& d : cfg.devices) {
        out += "device " + d.id + " " + d.capability;
        if (!d.roles.empty()) {
            out += " role=";
            for (std::size_t i = 0; i < d.roles.size(); ++i) out += (i ? "," : "") + d.roles[i];
        }
        if (d.offline_candidate) out += " offline-candidate";
        for (const auto& [a, v] : d.initial) out += " " + a + "=" + v;
        out += "\n";
    }
    for (const auto& [key, values] : cfg.domains) {
        out += "domain " + key + " = {";
        for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : " ") + values[i];
        out += " }\n";
    }
    out += "modes {";
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) out += (i ? ", " : " ") + cfg.modes[i];
    out += " } initial=" + cfg.initial_mode + "\n";
    for (const auto& inst : cfg.apps) {
        out += "app " + inst.id + " uses " + inst.app + " {";
        for (const auto& [slot, devs] : inst.bindings) {
            out += " bind " + slot + " =";
            for (std::size_t i = 0; i < devs.size(); ++i) out += (i ? ", " : " ") + devs[i];
            out += ";";
        }
        for (const auto& [name, value] : inst.params) out += " param " + name + " = " + value + ";";
        out += " }\n";
    }
    for (const auto& c : cfg.contacts) out += "contact " + quote_if_needed(c) + "\n";
    for (const auto& a : cfg.allowed) out += "allow " + quote_if_needed(a) + "\n";
    return out;
}

} // namespace homesafe
