#include "homesafe/appdsl.hpp"

#include <algorithm>
#include <set>

#include "homesafe/error.hpp"

namespace homesafe {

const SlotDecl* AppSpec::find_slot(std::string_view slot) const {
    for (const auto& s : slots)
        if (s.name == slot) return &s;
    return nullptr;
}

const ParamDecl* AppSpec::find_param(std::string_view param) const {
    for (const auto& p : params)
        if (p.name == param) return &p;
    return nullptr;
}

const HandlerSpec* AppSpec::find_handler(std::string_view handler) const {
    for (const auto& h : handlers)
        if (h.name == handler) return &h;
    return nullptr;
}

namespace {

// ---------------------------------------------------------------- parsing

std::string value_text(TokenStream& ts) {
    const Token& t = ts.peek();
    if (t.kind != TokenKind::Ident && t.kind != TokenKind::Number)
        ts.fail("unexpected " + describe(t), {"value"});
    return ts.next().text;
}

Statement parse_statement(TokenStream& ts);

Statement parse_call_statement(TokenStream& ts) {
    Statement s;
    const Token& head = ts.peek();
    std::string word = ts.expect_ident("statement");
    if (ts.accept_punct(".")) {
        ts.expect_keyword("set");
        s.kind = Statement::Kind::Command;
        s.slot = word;
        ts.expect_punct("(");
        s.attribute = ts.expect_ident("attribute");
        ts.expect_punct(",");
        s.value.text = value_text(ts);
        ts.expect_punct(")");
    } else if (word == "raise") {
        s.kind = Statement::Kind::Raise;
        ts.expect_punct("(");
        s.attribute = ts.expect_ident("attribute");
        ts.expect_punct(",");
        s.value.text = value_text(ts);
        ts.expect_punct(")");
    } else if (word == "sms") {
        s.kind = Statement::Kind::Sms;
        ts.expect_punct("(");
        if (ts.peek().kind == TokenKind::String) {
            s.value.text = ts.expect_string();
        } else if (ts.peek().kind == TokenKind::Ident) {
            s.value.text = ts.next().text;
            s.value.param = true;
        } else {
            ts.fail("unexpected " + describe(ts.peek()), {"recipient string", "parameter name"});
        }
        ts.expect_punct(")");
    } else if (word == "post") {
        s.kind = Statement::Kind::Post;
        ts.expect_punct("(");
        s.endpoint = ts.expect_string();
        ts.expect_punct(")");
    } else if (word == "unsubscribe") {
        s.kind = Statement::Kind::Unsubscribe;
        ts.expect_punct("(");
        s.handler = ts.expect_ident("handler name");
        ts.expect_punct(")");
    } else if (word == "runIn") {
        s.kind = Statement::Kind::RunIn;
        ts.expect_punct("(");
        s.delay = ts.expect_number();
        if (s.delay <= 0) ts.fail("runIn delay must be positive");
        ts.expect_punct(",");
        s.handler = ts.expect_ident("handler name");
        ts.expect_punct(")");
    } else {
        ts.fail_at(head, "unknown statement '" + word + "'",
                   {"if", "<slot>.set", "raise", "sms", "post", "unsubscribe", "runIn"});
    }
    ts.expect_punct(";");
    return s;
}

Statement parse_statement(TokenStream& ts) {
    if (ts.accept_keyword("if")) {
        Statement s;
        s.kind = Statement::Kind::If;
        ts.expect_punct("(");
        s.condition = parse_condition(ts);
        ts.expect_punct(")");
        s.body.push_back(parse_statement(ts));
        return s;
    }
    if (ts.accept_punct("{")) {
        Statement s;
        s.kind = Statement::Kind::Block;
        while (!ts.accept_punct("}")) {
            if (ts.at_end()) ts.fail("unterminated block", {"'}'"});
            s.body.push_back(parse_statement(ts));
        }
        return s;
    }
    return parse_call_statement(ts);
}

std::string default_handler_name(const Trigger& t) {
    switch (t.kind) {
    case Trigger::Kind::Touch: return "appTouch";
    case Trigger::Kind::Schedule: return "schedule" + std::to_string(t.period);
    case Trigger::Kind::Call: return {};
    case Trigger::Kind::Subscription: {
        std::string n = t.slot + "_" + t.attribute;
        if (t.value) n += "_" + *t.value;
        return n;
    }
    }
    return {};
}

struct PendingHandler {
    HandlerSpec spec;
    Token at;
};

struct ParsedApp {
    AppSpec app;
    Token name_at;
    std::vector<std::pair<std::string, Token>> slot_at;
    std::vector<PendingHandler> handlers;
};

ParsedApp parse_app_syntax(TokenStream& ts) {
    ParsedApp out;
    ts.expect_keyword("app");
    out.name_at = ts.peek();
    out.app.name = ts.expect_ident("app name");
    ts.expect_punct("{");
    while (!ts.accept_punct("}")) {
        const Token& at = ts.peek();
        if (ts.accept_keyword("description")) {
            out.app.description = ts.expect_string();
        } else if (ts.accept_keyword("slot")) {
            SlotDecl s;
            const Token& name_at = ts.peek();
            s.name = ts.expect_ident("slot name");
            ts.expect_punct(":");
            s.capability = ts.expect_ident("capability");
            if (ts.accept_keyword("one")) s.multiplicity = Multiplicity::One;
            else if (ts.accept_keyword("many")) s.multiplicity = Multiplicity::Many;
            else ts.fail("unexpected " + describe(ts.peek()), {"one", "many"});
            out.slot_at.emplace_back(s.name, name_at);
            out.app.slots.push_back(std::move(s));
        } else if (ts.accept_keyword("param")) {
            ParamDecl p;
            p.name = ts.expect_ident("parameter name");
            ts.expect_punct(":");
            if (ts.accept_keyword("number")) {
                p.numeric = true;
                ts.expect_keyword("in");
                ts.expect_punct("{");
                do {
                    p.domain.push_back(std::to_string(ts.expect_number()));
                } while (ts.accept_punct(","));
                ts.expect_punct("}");
            } else if (ts.accept_keyword("enum")) {
                ts.expect_punct("{");
                do {
                    p.domain.push_back(ts.expect_ident("enum value"));
                } while (ts.accept_punct(","));
                ts.expect_punct("}");
            } else {
                ts.fail("unexpected " + describe(ts.peek()), {"number", "enum"});
            }
            out.app.params.push_back(std::move(p));
        } else if (ts.accept_keyword("on")) {
            PendingHandler h;
            h.at = at;
            Trigger& t = h.spec.trigger;
            if (ts.accept_keyword("touch")) {
                t.kind = Trigger::Kind::Touch;
            } else if (ts.accept_keyword("call")) {
                t.kind = Trigger::Kind::Call;
            } else if (ts.is_keyword("schedule") && ts.is_punct("(", 1)) {
                ts.next();
                ts.next();
                t.kind = Trigger::Kind::Schedule;
                t.period = ts.expect_number();
                if (t.period <= 0) ts.fail("schedule period must be positive");
                ts.expect_punct(")");
            } else {
                t.kind = Trigger::Kind::Subscription;
                t.slot = ts.expect_ident("trigger");
                ts.expect_punct(".");
                t.attribute = ts.expect_ident("attribute");
                if (ts.accept_punct("==")) t.value = value_text(ts);
            }
            if (ts.accept_keyword("as")) h.spec.name = ts.expect_ident("handler name");
            else h.spec.name = default_handler_name(t);
            if (h.spec.name.empty()) ts.fail("a 'call' handler needs a name", {"as"});
            ts.expect_punct("{");
            while (!ts.accept_punct("}")) {
                if (ts.at_end()) ts.fail("unterminated handler body", {"'}'"});
                h.spec.body.push_back(parse_statement(ts));
            }
            out.handlers.push_back(std::move(h));
        } else {
            ts.fail("unexpected " + describe(at), {"description", "slot", "param", "on", "'}'"});
        }
    }
    return out;
}

// ---------------------------------------------------------------- binding

class Binder {
public:
    Binder(const AppSpec& app, const Catalog& catalog, const std::string& origin)
        : app_(app), catalog_(catalog), origin_(origin) {}

    [[noreturn]] void fail(const std::string& where, const std::string& msg) const {
        throw BindError(origin_ + ": app '" + app_.name + "'" + where + ": " + msg);
    }

    const Capability& slot_capability(const std::string& slot, const std::string& where) const {
        if (slot == kLocationSlot) return catalog_.get(kLocationCapability);
        const SlotDecl* s = app_.find_slot(slot);
        if (!s) fail(where, "undeclared slot '" + slot + "'");
        return catalog_.get(s->capability);
    }

    const AttributeSpec& attribute(const Capability& cap, const std::string& attr,
                                   const std::string& where) const {
        const AttributeSpec* a = cap.find(attr);
        if (!a) fail(where, "capability '" + cap.name + "' has no attribute '" + attr + "'");
        return *a;
    }

    void check_literal(const AttributeSpec& attr, const std::string& value,
                       const std::string& where) const {
        if (attr.numeric) {
            bool ok = !value.empty() &&
                      std::all_of(value.begin() + (value[0] == '-' ? 1 : 0), value.end(),
                                  [](char c) { return c >= '0' && c <= '9'; });
            if (!ok) fail(where, "'" + value + "' is not a number for '" + attr.name + "'");
            return;
        }
        if (attr.domain.empty()) return; // supplied by the configuration (modes)
        if (std::find(attr.domain.begin(), attr.domain.end(), value) == attr.domain.end())
            fail(where, "value '" + value + "' is not in the domain of '" + attr.name + "'");
    }

    void bind_value(ValueRef& v, const AttributeSpec& attr, const std::string& where) const {
        if (const ParamDecl* p = app_.find_param(v.text)) {
            v.param = true;
            if (p->numeric != attr.numeric)
                fail(where, "parameter '" + p->name + "' kind does not match attribute '" +
                                attr.name + "'");
            return;
        }
        v.param = false;
        check_literal(attr, v.text, where);
    }

    void bind_condition(Expr& e, const std::string& where) const {
        if (e.kind != Expr::Kind::Compare) {
            for (auto& a : e.args) bind_condition(a, where);
            return;
        }
        const AttributeSpec* attrs[2] = {nullptr, nullptr};
        Operand* ops[2] = {&e.lhs, &e.rhs};
        for (int i = 0; i < 2; ++i) {
            Operand& o = *ops[i];
            if (o.kind == Operand::Kind::DeviceAttr) {
                const Capability& cap = slot_capability(o.ref, where);
                attrs[i] = &attribute(cap, o.attribute, where);
            } else if (o.kind == Operand::Kind::Mode) {
                attrs[i] = catalog_.get(kLocationCapability).find(kModeAttribute);
            }
        }
        bool ordering = e.op != CmpOp::Eq && e.op != CmpOp::Ne;
        for (int i = 0; i < 2; ++i) {
            if (ordering && attrs[i] && !attrs[i]->numeric)
                fail(where, "ordering comparison on non-numeric attribute '" + attrs[i]->name + "'");
            Operand& o = *ops[i];
            if (o.kind != Operand::Kind::Name) continue;
            if (app_.find_param(o.text)) continue;
            if (const AttributeSpec* other = attrs[1 - i]) check_literal(*other, o.text, where);
        }
    }

    void bind_statement(Statement& s, const std::string& where) const {
        switch (s.kind) {
        case Statement::Kind::If:
            bind_condition(s.condition, where);
            [[fallthrough]];
        case Statement::Kind::Block:
            for (auto& b : s.body) bind_statement(b, where);
            break;
        case Statement::Kind::Command: {
            const Capability& cap = slot_capability(s.slot, where);
            const AttributeSpec& attr = attribute(cap, s.attribute, where);
            if (attr.access != AttrAccess::Commanded)
                fail(where, "attribute '" + s.attribute + "' of '" + s.slot + "' cannot be commanded");
            bind_value(s.value, attr, where);
            break;
        }
        case Statement::Kind::Raise: {
            const SlotDecl* found = nullptr;
            for (const auto& slot : app_.slots) {
                const AttributeSpec* a = catalog_.get(slot.capability).find(s.attribute);
                if (!a || a->access != AttrAccess::Sensed) continue;
                if (found) fail(where, "raised attribute '" + s.attribute + "' matches several slots");
                found = &slot;
            }
            if (!found) fail(where, "no slot reports attribute '" + s.attribute + "' for raise");
            s.slot = found->name;
            bind_value(s.value, *catalog_.get(found->capability).find(s.attribute), where);
            break;
        }
        case Statement::Kind::Sms:
            if (s.value.param && !app_.find_param(s.value.text))
                fail(where, "undeclared parameter '" + s.value.text + "'");
            break;
        case Statement::Kind::Post:
            break;
        case Statement::Kind::Unsubscribe:
        case Statement::Kind::RunIn:
            if (!app_.find_handler(s.handler))
                fail(where, "unknown handler '" + s.handler + "'");
            break;
        }
    }

    void bind_trigger(const Trigger& t, const std::string& where) const {
        if (t.kind != Trigger::Kind::Subscription) return;
        const Capability& cap = slot_capability(t.slot, where);
        const AttributeSpec& attr = attribute(cap, t.attribute, where);
        if (t.value) check_literal(attr, *t.value, where);
    }

private:
    const AppSpec& app_;
    const Catalog& catalog_;
    const std::string& origin_;
};

AppSpec bind(ParsedApp parsed, const Catalog& catalog, TokenStream& ts) {
    AppSpec& app = parsed.app;
    std::set<std::string> seen;
    for (const auto& [name, at] : parsed.slot_at) {
        if (name == kLocationSlot) ts.fail_at(at, "slot name 'location' is reserved");
        if (!seen.insert(name).second) ts.fail_at(at, "duplicate slot '" + name + "'");
    }
    for (const auto& slot : app.slots) {
        if (!catalog.find(slot.capability))
            throw BindError(ts.origin() + ": app '" + app.name + "', slot '" + slot.name +
                            "': unknown capability '" + slot.capability + "'");
    }
    seen.clear();
    for (const auto& p : app.params) {
        if (!seen.insert(p.name).second)
            throw BindError(ts.origin() + ": app '" + app.name + "': duplicate parameter '" +
                            p.name + "'");
        if (app.find_slot(p.name))
            throw BindError(ts.origin() + ": app '" + app.name + "': parameter '" + p.name +
                            "' shadows a slot");
    }
    seen.clear();
    for (auto& h : parsed.handlers) {
        if (!seen.insert(h.spec.name).second)
            ts.fail_at(h.at, "duplicate handler '" + h.spec.name + "' (name it with 'as')");
        app.handlers.push_back(h.spec);
    }
    Binder binder(app, catalog, ts.origin());
    for (auto& h : app.handlers) {
        std::string where = ", handler '" + h.name + "'";
        binder.bind_trigger(h.trigger, where);
        for (auto& s : h.body) binder.bind_statement(s, where);
    }
    return app;
}

// ---------------------------------------------------------------- rendering

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

void render_statement(const Statement& s, int indent, std::string& out) {
    std::string pad(indent, ' ');
    switch (s.kind) {
    case Statement::Kind::If: {
        out += pad + "if (" + render(s.condition) + ")";
        const Statement& b = s.body.front();
        if (b.kind == Statement::Kind::Block) {
            out += " {\n";
            for (const auto& c : b.body) render_statement(c, indent + 2, out);
            out += pad + "}\n";
        } else {
            out += "\n";
            render_statement(b, indent + 2, out);
        }
        return;
    }
    case Statement::Kind::Block:
        out += pad + "{\n";
        for (const auto& c : s.body) render_statement(c, indent + 2, out);
        out += pad + "}\n";
        return;
    case Statement::Kind::Command:
        out += pad + s.slot + ".set(" + s.attribute + ", " + s.value.text + ");\n";
        return;
    case Statement::Kind::Raise:
        out += pad + "raise(" + s.attribute + ", " + s.value.text + ");\n";
        return;
    case Statement::Kind::Sms:
        out += pad + "sms(" + (s.value.param ? s.value.text : quote(s.value.text)) + ");\n";
        return;
    case Statement::Kind::Post:
        out += pad + "post(" + quote(s.endpoint) + ");\n";
        return;
    case Statement::Kind::Unsubscribe:
        out += pad + "unsubscribe(" + s.handler + ");\n";
        return;
    case Statement::Kind::RunIn:
        out += pad + "runIn(" + std::to_string(s.delay) + ", " + s.handler + ");\n";
        return;
    }
}

// ---------------------------------------------------------------- extraction

void collect_statement(const AppSpec& app, const Statement& s, const Catalog& catalog,
                       HandlerIO& io) {
    auto slot_cap = [&](const std::string& slot) -> const Capability& {
        if (slot == kLocationSlot) return catalog.get(kLocationCapability);
        return catalog.get(app.find_slot(slot)->capability);
    };
    switch (s.kind) {
    case Statement::Kind::If:
        for_each_operand(s.condition, [&](const Operand& o) {
            if (o.kind == Operand::Kind::DeviceAttr) io.inputs.insert(EventPattern::any(o.attribute));
            else if (o.kind == Operand::Kind::Mode) io.inputs.insert(EventPattern::any(std::string(kModeAttribute)));
            else if (o.kind == Operand::Kind::Clock) io.inputs.insert(EventPattern::any("clock"));
        });
        [[fallthrough]];
    case Statement::Kind::Block:
        for (const auto& b : s.body) collect_statement(app, b, catalog, io);
        break;
    case Statement::Kind::Command: {
        io.outputs.insert(s.value.param ? EventPattern::any(s.attribute)
                                        : EventPattern::exact(s.attribute, s.value.text));
        // Changing a gating attribute can suppress or release reports of the
        // attribute it gates.
        for (const auto& a : slot_cap(s.slot).attributes)
            if (a.gate && a.gate->attribute == s.attribute) io.outputs.insert(EventPattern::any(a.name));
        break;
    }
    case Statement::Kind::Raise:
        io.outputs.insert(s.value.param ? EventPattern::any(s.attribute)
                                        : EventPattern::exact(s.attribute, s.value.text));
        break;
    case Statement::Kind::RunIn:
        io.outputs.insert(EventPattern::exact("timer", app.name + "." + s.handler));
        break;
    case Statement::Kind::Sms:
    case Statement::Kind::Post:
    case Statement::Kind::Unsubscribe:
        break;
    }
}

} // namespace

AppSpec parse_app(std::string_view source, const Catalog& catalog, const std::string& origin) {
    TokenStream ts(tokenize(source, origin), origin);
    AppSpec app = bind(parse_app_syntax(ts), catalog, ts);
    if (!ts.at_end()) ts.fail("unexpected " + describe(ts.peek()), {"end of input"});
    return app;
}

std::vector<AppSpec> parse_apps(std::string_view source, const Catalog& catalog,
                                const std::string& origin) {
    TokenStream ts(tokenize(source, origin), origin);
    std::vector<AppSpec> out;
    while (!ts.at_end()) out.push_back(bind(parse_app_syntax(ts), catalog, ts));
    return out;
}

std::string render_app(const AppSpec& app) {
    std::string out = "app " + app.name + " {\n";
    if (!app.description.empty()) out += "  description " + quote(app.description) + "\n";
    for (const auto& s : app.slots)
        out += "  slot " + s.name + ": " + s.capability +
               (s.multiplicity == Multiplicity::One ? " one\n" : " many\n");
    for (const auto& p : app.params) {
        out += "  param " + p.name + ": " + (p.numeric ? "number in {" : "enum {");
        for (std::size_t i = 0; i < p.domain.size(); ++i) out += (i ? ", " : "") + p.domain[i];
        out += "}\n";
    }
    for (const auto& h : app.handlers) {
        out += "\n  on ";
        switch (h.trigger.kind) {
        case Trigger::Kind::Touch: out += "touch"; break;
        case Trigger::Kind::Call: out += "call"; break;
        case Trigger::Kind::Schedule: out += "schedule(" + std::to_string(h.trigger.period) + ")"; break;
        case Trigger::Kind::Subscription:
            out += h.trigger.slot + "." + h.trigger.attribute;
            if (h.trigger.value) out += " == " + *h.trigger.value;
            break;
        }
        out += " as " + h.name + " {\n";
        for (const auto& s : h.body) render_statement(s, 4, out);
        out += "  }\n";
    }
    out += "}\n";
    return out;
}

std::vector<HandlerIO> extract_io_events(const AppSpec& app, const Catalog& catalog) {
    std::vector<HandlerIO> out;
    for (const auto& h : app.handlers) {
        HandlerIO io;
        io.handler = h.name;
        switch (h.trigger.kind) {
        case Trigger::Kind::Subscription:
            io.inputs.insert(h.trigger.value ? EventPattern::exact(h.trigger.attribute, *h.trigger.value)
                                             : EventPattern::any(h.trigger.attribute));
            break;
        case Trigger::Kind::Touch: io.inputs.insert(EventPattern::exact("app", "touch")); break;
        case Trigger::Kind::Schedule: io.inputs.insert(EventPattern::exact("clock", "tick")); break;
        case Trigger::Kind::Call: io.inputs.insert(EventPattern::exact("timer", app.name + "." + h.name)); break;
        }
        for (const auto& s : h.body) collect_statement(app, s, catalog, io);
        out.push_back(std::move(io));
    }
    return out;
}

} // namespace homesafe
