#include "homesafe/catalog.hpp"

#include <fstream>
#include <sstream>

#include "homesafe/error.hpp"
#include "homesafe/lexer.hpp"

#ifndef HOMESAFE_DATA_DIR
#define HOMESAFE_DATA_DIR "data"
#endif

namespace homesafe {

const AttributeSpec* Capability::find(std::string_view attribute) const {
    for (const auto& a : attributes)
        if (a.name == attribute) return &a;
    return nullptr;
}

namespace {

std::string value_token(TokenStream& ts) {
    const Token& t = ts.peek();
    if (t.kind != TokenKind::Ident && t.kind != TokenKind::Number)
        ts.fail("unexpected " + describe(t), {"value"});
    return ts.next().text;
}

std::vector<std::string> value_set(TokenStream& ts) {
    std::vector<std::string> out;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return out;
    do {
        out.push_back(value_token(ts));
    } while (ts.accept_punct(","));
    ts.expect_punct("}");
    return out;
}

} // namespace

Catalog Catalog::parse(std::string_view text, const std::string& origin) {
    TokenStream ts(tokenize(text, origin), origin);
    Catalog cat;
    while (!ts.at_end()) {
        ts.expect_keyword("capability");
        const Token& name_tok = ts.peek();
        Capability cap;
        cap.name = ts.expect_ident("capability name");
        if (cat.find(cap.name)) ts.fail_at(name_tok, "duplicate capability '" + cap.name + "'");
        if (ts.accept_keyword("sensor")) cap.kind = CapabilityKind::Sensor;
        else if (ts.accept_keyword("actuator")) cap.kind = CapabilityKind::Actuator;
        else if (ts.accept_keyword("mixed")) cap.kind = CapabilityKind::Mixed;
        else ts.fail("unexpected " + describe(ts.peek()), {"sensor", "actuator", "mixed"});

        while (ts.is_keyword("sense") || ts.is_keyword("command")) {
            const Token& kw = ts.next();
            AttributeSpec attr;
            attr.access = kw.text == "sense" ? AttrAccess::Sensed : AttrAccess::Commanded;
            const Token& attr_tok = ts.peek();
            attr.name = ts.expect_ident("attribute name");
            if (cap.find(attr.name))
                ts.fail_at(attr_tok, "duplicate attribute '" + attr.name + "' in " + cap.name);
            attr.numeric = ts.accept_keyword("numeric");
            attr.domain = value_set(ts);
            if (ts.accept_keyword("gate")) {
                Gate g;
                g.attribute = ts.expect_ident("gating attribute");
                ts.expect_punct("=");
                g.value = value_token(ts);
                attr.gate = g;
            }
            if (cap.kind == CapabilityKind::Sensor && attr.access == AttrAccess::Commanded)
                ts.fail_at(kw, "sensor capability '" + cap.name + "' cannot declare commands");
            if (cap.kind == CapabilityKind::Actuator && attr.access == AttrAccess::Sensed)
                ts.fail_at(kw, "actuator capability '" + cap.name + "' cannot declare sensed attributes");
            cap.attributes.push_back(std::move(attr));
        }
        if (cap.attributes.empty()) ts.fail_at(name_tok, "capability '" + cap.name + "' has no attributes");
        for (const auto& a : cap.attributes) {
            if (a.gate && !cap.find(a.gate->attribute))
                ts.fail_at(name_tok, "gate of '" + a.name + "' names unknown attribute '" +
                                         a.gate->attribute + "'");
        }
        cat.caps_.push_back(std::move(cap));
    }
    return cat;
}

Catalog Catalog::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read catalog file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

std::string Catalog::data_dir() { return HOMESAFE_DATA_DIR; }

const Catalog& Catalog::standard() {
    static const Catalog cat = load_file(data_dir() + "/capabilities.cat");
    return cat;
}

void Catalog::merge(const Catalog& other) {
    for (const auto& cap : other.caps_) {
        if (find(cap.name)) throw BindError("duplicate capability '" + cap.name + "'");
        caps_.push_back(cap);
    }
}

const Capability* Catalog::find(std::string_view name) const {
    for (const auto& c : caps_)
        if (c.name == name) return &c;
    return nullptr;
}

const Capability& Catalog::get(std::string_view name) const {
    if (const Capability* c = find(name)) return *c;
    throw BindError("unknown capability '" + std::string(name) + "'");
}

std::vector<const Capability*> Catalog::with_attribute(std::string_view attribute) const {
    std::vector<const Capability*> out;
    for (const auto& c : caps_)
        if (c.find(attribute)) out.push_back(&c);
    return out;
}

bool is_pseudo_attribute(std::string_view attribute) {
    return attribute == "clock" || attribute == "timer";
}

} // namespace homesafe
