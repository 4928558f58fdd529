#include "homesafe/properties.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "homesafe/error.hpp"

namespace homesafe {

std::string_view to_string(PropertyKind kind) {
    switch (kind) {
    case PropertyKind::Invariant: return "invariant";
    case PropertyKind::ConflictFree: return "conflict-free";
    case PropertyKind::RepeatFree: return "repeat-free";
    case PropertyKind::Leakage: return "leakage";
    case PropertyKind::SensitiveCommand: return "sensitive-command";
    case PropertyKind::Robustness: return "robustness";
    }
    return "?";
}

namespace {

PropertyKind parse_kind(TokenStream& ts, const Token& at, const std::string& text) {
    static const std::pair<std::string_view, PropertyKind> kinds[] = {
        {"invariant", PropertyKind::Invariant},
        {"conflict-free", PropertyKind::ConflictFree},
        {"repeat-free", PropertyKind::RepeatFree},
        {"leakage", PropertyKind::Leakage},
        {"sensitive-command", PropertyKind::SensitiveCommand},
        {"robustness", PropertyKind::Robustness}};
    for (auto [name, kind] : kinds)
        if (name == text) return kind;
    ts.fail_at(at, "unknown property kind '" + text + "'",
               {"invariant", "conflict-free", "repeat-free", "leakage", "sensitive-command", "robustness"});
}

} // namespace

PropertyCatalog PropertyCatalog::parse(std::string_view text, const std::string& origin) {
    TokenStream ts(tokenize(text, origin), origin);
    PropertyCatalog cat;
    while (!ts.at_end()) {
        ts.expect_keyword("property");
        const Token& id_tok = ts.peek();
        PropertyDef def;
        def.id = ts.expect_ident("property id");
        if (cat.find(def.id)) ts.fail_at(id_tok, "duplicate property '" + def.id + "'");
        bool have_kind = false, have_desc = false;
        while (ts.peek().kind == TokenKind::Ident && ts.is_punct("=", 1) && !ts.is_keyword("property")) {
            const Token& key_tok = ts.peek();
            std::string key = ts.next().text;
            ts.next();
            if (key == "kind") {
                const Token& at = ts.peek();
                def.kind = parse_kind(ts, at, ts.expect_ident("kind"));
                have_kind = true;
            } else if (key == "category") {
                def.category = ts.expect_ident("category");
            } else if (key == "aspect") {
                def.aspect = ts.expect_ident("aspect");
            } else if (key == "roles") {
                do {
                    RoleRef r;
                    r.tag = ts.expect_ident("role tag");
                    r.many = ts.accept_punct("*");
                    def.roles.push_back(std::move(r));
                } while (ts.accept_punct(","));
            } else if (key == "pred") {
                const Token& at = ts.peek();
                def.predicate_text = ts.expect_string();
                def.predicate = parse_condition(def.predicate_text,
                                                origin + ":" + std::to_string(at.line) + " (property " + def.id + ")");
            } else if (key == "desc") {
                def.description = ts.expect_string();
                have_desc = true;
            } else {
                ts.fail_at(key_tok, "unknown field '" + key + "'",
                           {"kind", "category", "aspect", "roles", "pred", "desc"});
            }
        }
        if (!have_kind) ts.fail_at(id_tok, "property '" + def.id + "' has no kind", {"kind="});
        if (!have_desc) ts.fail_at(id_tok, "property '" + def.id + "' has no description", {"desc="});
        bool invariant = def.kind == PropertyKind::Invariant;
        if (invariant && def.predicate_text.empty())
            ts.fail_at(id_tok, "invariant '" + def.id + "' has no predicate", {"pred="});
        if (!invariant && !def.predicate_text.empty())
            ts.fail_at(id_tok, "only invariants take a predicate");
        if (invariant) {
            for_each_operand(def.predicate, [&](const Operand& o) {
                if (o.kind != Operand::Kind::DeviceAttr) return;
                bool declared = std::any_of(def.roles.begin(), def.roles.end(),
                                            [&](const RoleRef& r) { return r.tag == o.ref; });
                if (!declared) ts.fail_at(id_tok, "predicate of '" + def.id + "' uses undeclared role '" + o.ref + "'");
            });
        }
        cat.defs_.push_back(std::move(def));
    }
    return cat;
}

PropertyCatalog PropertyCatalog::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read property catalog '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const PropertyCatalog& PropertyCatalog::standard() {
    static const PropertyCatalog cat = load_file(Catalog::data_dir() + "/properties.cat");
    return cat;
}

const PropertyDef* PropertyCatalog::find(std::string_view id) const {
    for (const auto& d : defs_)
        if (d.id == id) return &d;
    return nullptr;
}

std::string SafetyProperty::render() const {
    if (def.kind != PropertyKind::Invariant) return std::string(to_string(def.kind));
    Expr e = def.predicate;
    for_each_operand(e, [&](Operand& o) {
        if (o.kind != Operand::Kind::DeviceAttr) return;
        const auto& devs = bindings.at(o.ref);
        if (devs.size() == 1) {
            o.ref = devs.front();
        } else {
            std::string all = "all(";
            for (std::size_t i = 0; i < devs.size(); ++i) all += (i ? "," : "") + devs[i];
            o.ref = all + ")";
        }
    });
    return homesafe::render(e);
}

std::vector<SafetyProperty> instantiate_properties(const PropertyCatalog& catalog, const SystemConfig& config,
                                                   const std::vector<std::string>& selected,
                                                   std::vector<std::string>* notices) {
    std::vector<const PropertyDef*> defs;
    bool all = selected.empty() || std::find(selected.begin(), selected.end(), "all") != selected.end();
    if (all) {
        for (const auto& d : catalog.properties()) defs.push_back(&d);
    } else {
        for (const auto& id : selected) {
            const PropertyDef* d = catalog.find(id);
            if (!d) throw ConfigError("unknown property '" + id + "'");
            if (std::find(defs.begin(), defs.end(), d) == defs.end()) defs.push_back(d);
        }
    }
    std::vector<SafetyProperty> out;
    for (const PropertyDef* d : defs) {
        SafetyProperty p;
        p.def = *d;
        std::string missing;
        for (const auto& role : d->roles) {
            auto devs = config.devices_with_role(role.tag);
            if (devs.empty()) {
                missing = role.tag;
                break;
            }
            if (!role.many && devs.size() > 1)
                throw ConfigError("property '" + d->id + "': role '" + role.tag + "' is ambiguous (" +
                                  devs[0]->id + ", " + devs[1]->id + ")");
            auto& ids = p.bindings[role.tag];
            for (const DeviceDecl* dev : devs) {
                const Capability* cap = config.catalog->find(dev->capability);
                // Every attribute the predicate reads through this role must exist.
                for_each_operand(d->predicate, [&](const Operand& o) {
                    if (o.kind == Operand::Kind::DeviceAttr && o.ref == role.tag && !cap->find(o.attribute))
                        throw ConfigError("property '" + d->id + "': device '" + dev->id + "' (role '" +
                                          role.tag + "') has no attribute '" + o.attribute + "'");
                });
                ids.push_back(dev->id);
            }
        }
        if (!missing.empty()) {
            if (notices) notices->push_back("property " + d->id + " skipped: no device has role '" + missing + "'");
            continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CompiledProperty> compile_properties(const SystemModel& model,
                                                 const std::vector<SafetyProperty>& props) {
    std::vector<CompiledProperty> out;
    for (const auto& p : props) {
        CompiledProperty c;
        c.property = &p;
        if (p.kind() == PropertyKind::Invariant) c.predicate = model.compile_property(p.def.predicate);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

bool member(const std::vector<std::string>& list, const std::string& v) {
    return std::find(list.begin(), list.end(), v) != list.end();
}

} // namespace

Verdict check(const CompiledProperty& prop, const SystemModel& model, const SystemState& state,
              const CascadeRecord& record, std::size_t first_command, std::size_t first_action) {
    const SafetyProperty& p = *prop.property;
    const std::string& aspect = p.def.aspect;
    const auto& cmds = record.commands;
    switch (p.kind()) {
    case PropertyKind::Invariant:
        if (model.eval(prop.predicate, state, true)) return {};
        return {false, p.render() + " is false", {}, {}};
    case PropertyKind::ConflictFree:
    case PropertyKind::RepeatFree: {
        bool conflict = p.kind() == PropertyKind::ConflictFree;
        for (std::size_t j = first_command; j < cmds.size(); ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                if (cmds[i].var != cmds[j].var) continue;
                if ((cmds[i].value != cmds[j].value) != conflict) continue;
                const std::string name = model.var_name(cmds[j].var);
                std::vector<int> pair{static_cast<int>(i), static_cast<int>(j)};
                if (conflict)
                    return {false,
                            name + " commanded " + model.value_text(cmds[i].var, cmds[i].value) + " and " +
                                model.value_text(cmds[j].var, cmds[j].value) + " in one cascade",
                            pair, {}};
                return {false,
                        name + " commanded " + model.value_text(cmds[j].var, cmds[j].value) +
                            " repeatedly in one cascade",
                        pair, {}};
            }
        }
        return {};
    }
    case PropertyKind::Leakage:
        for (std::size_t i = first_action; i < record.actions.size(); ++i) {
            const auto& a = record.actions[i];
            std::vector<int> at{static_cast<int>(i)};
            if (a.kind == ActionRecord::Kind::Sms && aspect != "network" && !member(model.config().contacts, a.text))
                return {false, "message sent to unlisted recipient " + a.text, {}, at};
            if (a.kind == ActionRecord::Kind::Post && aspect != "sms" && !member(model.config().allowed, a.text))
                return {false, "data sent to unlisted endpoint " + a.text, {}, at};
        }
        return {};
    case PropertyKind::SensitiveCommand:
        for (std::size_t i = first_action; i < record.actions.size(); ++i) {
            const auto& a = record.actions[i];
            std::vector<int> at{static_cast<int>(i)};
            if (a.kind == ActionRecord::Kind::Unsubscribe && aspect != "fake-event")
                return {false, "unsubscribe(" + a.text + ") executed", {}, at};
            if (a.kind == ActionRecord::Kind::Raise && a.fake && aspect != "unsubscribe")
                return {false, "fake event " + a.text + " raised", {}, at};
        }
        return {};
    case PropertyKind::Robustness:
        for (std::size_t i = first_command; i < cmds.size(); ++i) {
            const auto& c = cmds[i];
            if (c.delivered) continue;
            bool notified = std::any_of(record.actions.begin(), record.actions.end(), [&](const ActionRecord& a) {
                return a.kind == ActionRecord::Kind::Sms && a.seq > c.seq;
            });
            if (!notified)
                return {false,
                        "command " + model.var_name(c.var) + "=" + model.value_text(c.var, c.value) +
                            " was not carried out and nobody was notified",
                        {static_cast<int>(i)}, {}};
        }
        return {};
    }
    return {};
}

} // namespace homesafe
