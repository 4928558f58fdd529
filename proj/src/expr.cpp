#include "homesafe/expr.hpp"

#include "homesafe/catalog.hpp"

namespace homesafe {

std::string_view to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

namespace {

Expr parse_or(TokenStream& ts);

Operand parse_operand(TokenStream& ts) {
    Operand o;
    const Token& t = ts.peek();
    if (t.kind == TokenKind::Number) {
        o.kind = Operand::Kind::Number;
        o.text = t.text;
        o.number = ts.expect_number();
        return o;
    }
    if (t.kind != TokenKind::Ident) ts.fail("unexpected " + describe(t), {"operand"});
    std::string name = ts.next().text;
    if (ts.accept_punct(".")) {
        std::string attr = ts.expect_ident("attribute");
        if (name == kLocationSlot && attr == kModeAttribute) {
            o.kind = Operand::Kind::Mode;
        } else {
            o.kind = Operand::Kind::DeviceAttr;
            o.ref = name;
            o.attribute = attr;
        }
        return o;
    }
    if (name == kModeAttribute) {
        o.kind = Operand::Kind::Mode;
    } else if (name == "clock") {
        o.kind = Operand::Kind::Clock;
    } else {
        o.kind = Operand::Kind::Name;
        o.text = name;
    }
    return o;
}

bool accept_cmp(TokenStream& ts, CmpOp& op) {
    static constexpr std::pair<std::string_view, CmpOp> ops[] = {
        {"==", CmpOp::Eq}, {"!=", CmpOp::Ne}, {"<=", CmpOp::Le},
        {">=", CmpOp::Ge}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
    for (auto [text, value] : ops) {
        if (ts.accept_punct(text)) {
            op = value;
            return true;
        }
    }
    return false;
}

Expr parse_unary(TokenStream& ts) {
    if (ts.accept_punct("!")) {
        Expr e;
        e.kind = Expr::Kind::Not;
        e.args.push_back(parse_unary(ts));
        return e;
    }
    if (ts.accept_punct("(")) {
        Expr inner = parse_or(ts);
        ts.expect_punct(")");
        return inner;
    }
    Expr e;
    e.kind = Expr::Kind::Compare;
    e.lhs = parse_operand(ts);
    if (!accept_cmp(ts, e.op))
        ts.fail("unexpected " + describe(ts.peek()), {"==", "!=", "<", "<=", ">", ">="});
    e.rhs = parse_operand(ts);
    return e;
}

Expr parse_chain(TokenStream& ts, std::string_view op, Expr::Kind kind,
                 Expr (*sub)(TokenStream&)) {
    Expr first = sub(ts);
    if (!ts.is_punct(op)) return first;
    Expr e;
    e.kind = kind;
    e.args.push_back(std::move(first));
    while (ts.accept_punct(op)) e.args.push_back(sub(ts));
    return e;
}

Expr parse_and(TokenStream& ts) { return parse_chain(ts, "&&", Expr::Kind::And, parse_unary); }
Expr parse_or(TokenStream& ts) { return parse_chain(ts, "||", Expr::Kind::Or, parse_and); }

std::string render_child(const Expr& child, Expr::Kind parent) {
    bool wrap = false;
    if (child.kind == Expr::Kind::Or || child.kind == Expr::Kind::And) wrap = true;
    if (parent == Expr::Kind::Or && child.kind == Expr::Kind::And) wrap = false;
    std::string s = render(child);
    return wrap ? "(" + s + ")" : s;
}

} // namespace

Expr parse_condition(TokenStream& ts) { return parse_or(ts); }

Expr parse_condition(std::string_view text, const std::string& origin) {
    TokenStream ts(tokenize(text, origin), origin);
    Expr e = parse_condition(ts);
    if (!ts.at_end()) ts.fail("unexpected " + describe(ts.peek()), {"end of condition"});
    return e;
}

std::string render(const Operand& o) {
    switch (o.kind) {
    case Operand::Kind::DeviceAttr: return o.ref + "." + o.attribute;
    case Operand::Kind::Mode: return std::string(kModeAttribute);
    case Operand::Kind::Clock: return "clock";
    case Operand::Kind::Name:
    case Operand::Kind::Number: return o.text;
    }
    return {};
}

std::string render(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Compare:
        return render(e.lhs) + " " + std::string(to_string(e.op)) + " " + render(e.rhs);
    case Expr::Kind::Not: {
        const Expr& a = e.args.front();
        if (a.kind == Expr::Kind::Compare || a.kind == Expr::Kind::And ||
            a.kind == Expr::Kind::Or)
            return "!(" + render(a) + ")";
        return "!" + render(a);
    }
    case Expr::Kind::And:
    case Expr::Kind::Or: {
        std::string sep = e.kind == Expr::Kind::And ? " && " : " || ";
        std::string out;
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += sep;
            out += render_child(e.args[i], e.kind);
        }
        return out;
    }
    }
    return {};
}

void for_each_operand(const Expr& e, const std::function<void(const Operand&)>& fn) {
    if (e.kind == Expr::Kind::Compare) {
        fn(e.lhs);
        fn(e.rhs);
        return;
    }
    for (const auto& a : e.args) for_each_operand(a, fn);
}

void for_each_operand(Expr& e, const std::function<void(Operand&)>& fn) {
    if (e.kind == Expr::Kind::Compare) {
        fn(e.lhs);
        fn(e.rhs);
        return;
    }
    for (auto& a : e.args) for_each_operand(a, fn);
}

} // namespace homesafe
