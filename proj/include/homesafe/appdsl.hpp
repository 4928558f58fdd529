#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "homesafe/catalog.hpp"
#include "homesafe/expr.hpp"
#include "homesafe/pattern.hpp"

namespace homesafe {

enum class Multiplicity { One, Many };

struct SlotDecl {
    std::string name;
    std::string capability;
    Multiplicity multiplicity = Multiplicity::One;

    bool operator==(const SlotDecl&) const = default;
};

struct ParamDecl {
    std::string name;
    bool numeric = false;
    std::vector<std::string> domain;

    bool operator==(const ParamDecl&) const = default;
};

struct Trigger {
    enum class Kind {
        Subscription, // slot.attr [== value]
        Schedule,     // schedule(period): fires every `period` clock ticks
        Touch,        // the user taps the app
        Call          // only reachable through runIn
    };

    Kind kind = Kind::Subscription;
    std::string slot;
    std::string attribute;
    std::optional<std::string> value;
    long period = 0;

    bool operator==(const Trigger&) const = default;
};

// A literal value or a reference to a declared parameter.
struct ValueRef {
    std::string text;
    bool param = false;

    bool operator==(const ValueRef&) const = default;
};

struct Statement {
    enum class Kind { If, Block, Command, Raise, Sms, Post, Unsubscribe, RunIn };

    Kind kind = Kind::Block;
    Expr condition;               // If
    std::vector<Statement> body;  // If (exactly one), Block
    std::string slot;             // Command
    std::string attribute;        // Command, Raise
    ValueRef value;               // Command, Raise, Sms recipient
    std::string endpoint;         // Post
    std::string handler;          // Unsubscribe, RunIn
    long delay = 0;               // RunIn

    bool operator==(const Statement&) const = default;
};

struct HandlerSpec {
    std::string name;
    Trigger trigger;
    std::vector<Statement> body;

    bool operator==(const HandlerSpec&) const = default;
};

struct AppSpec {
    std::string name;
    std::string description;
    std::vector<SlotDecl> slots;
    std::vector<ParamDecl> params;
    std::vector<HandlerSpec> handlers;

    const SlotDecl* find_slot(std::string_view slot) const;
    const ParamDecl* find_param(std::string_view param) const;
    const HandlerSpec* find_handler(std::string_view handler) const;

    bool operator==(const AppSpec&) const = default;
};

// Parses and binds one app. Every slot, parameter, attribute and handler
// reference is checked against the declarations and the catalog.
AppSpec parse_app(std::string_view source, const Catalog& catalog,
                  const std::string& origin = "<app>");

// Several apps in one text, in order of appearance.
std::vector<AppSpec> parse_apps(std::string_view source, const Catalog& catalog,
                                const std::string& origin = "<apps>");

// Canonical text of the app in the same grammar.
std::string render_app(const AppSpec& app);

struct HandlerIO {
    std::string handler;
    PatternSet inputs;
    PatternSet outputs;
};

// Input and output event patterns of every handler, in declaration order.
std::vector<HandlerIO> extract_io_events(const AppSpec& app, const Catalog& catalog);

} // namespace homesafe
