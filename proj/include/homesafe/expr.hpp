#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homesafe/lexer.hpp"

namespace homesafe {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

// One side of a comparison. In app handlers `ref` names a slot; in safety
// properties it names a role tag.
struct Operand {
    enum class Kind { DeviceAttr, Mode, Clock, Name, Number };

    Kind kind = Kind::Name;
    std::string ref;
    std::string attribute;
    std::string text; // Name / Number spelling
    long number = 0;

    bool operator==(const Operand&) const = default;
};

// Boolean combination of comparisons.
struct Expr {
    enum class Kind { Compare, And, Or, Not };

    Kind kind = Kind::Compare;
    CmpOp op = CmpOp::Eq;
    Operand lhs;
    Operand rhs;
    std::vector<Expr> args;

    bool operator==(const Expr&) const = default;
};

// cond := or ; or := and ("||" and)* ; and := unary ("&&" unary)*
// unary := "!" unary | "(" cond ")" | operand cmp operand
Expr parse_condition(TokenStream& ts);
Expr parse_condition(std::string_view text, const std::string& origin);

std::string render(const Expr& e);
std::string render(const Operand& o);

void for_each_operand(const Expr& e, const std::function<void(const Operand&)>& fn);
void for_each_operand(Expr& e, const std::function<void(Operand&)>& fn);

} // namespace homesafe
