#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "homesafe/config.hpp"
#include "homesafe/expr.hpp"
#include "homesafe/model.hpp"

namespace homesafe {

enum class PropertyKind { Invariant, ConflictFree, RepeatFree, Leakage, SensitiveCommand, Robustness };

std::string_view to_string(PropertyKind kind);

struct RoleRef {
    std::string tag;
    bool many = false; // "tag*": every device carrying the tag, at least one
};

// An abstract property keyed by role tags.
struct PropertyDef {
    std::string id;
    PropertyKind kind = PropertyKind::Invariant;
    std::string category;
    // Narrows Leakage to "sms" or "network" and SensitiveCommand to
    // "unsubscribe" or "fake-event". Empty covers both.
    std::string aspect;
    std::vector<RoleRef> roles;
    Expr predicate; // Invariant only
    std::string predicate_text;
    std::string description;
};

// Catalog file, one record per property:
//
//   property <id> kind=<kind> [category=<c>] [roles=<tag>[*],...] [aspect=<a>]
//            [pred="<cond>"] desc="<text>"
class PropertyCatalog {
public:
    static PropertyCatalog parse(std::string_view text, const std::string& origin);
    static PropertyCatalog load_file(const std::string& path);
    static const PropertyCatalog& standard();

    const std::vector<PropertyDef>& properties() const { return defs_; }
    const PropertyDef* find(std::string_view id) const;

private:
    std::vector<PropertyDef> defs_;
};

// A property bound to the devices of one configuration.
struct SafetyProperty {
    PropertyDef def;
    std::map<std::string, std::vector<std::string>> bindings; // role -> device ids

    const std::string& id() const { return def.id; }
    PropertyKind kind() const { return def.kind; }
    // Predicate with roles replaced by device ids; a role covering several
    // devices renders as "all(a,b)".
    std::string render() const;
};

// Selected ids may be empty or contain "all" for the whole catalog.
// Properties whose roles have no device are skipped and reported through
// `notices`. Throws ConfigError for an unknown id or an ambiguous unique role.
std::vector<SafetyProperty> instantiate_properties(const PropertyCatalog& catalog, const SystemConfig& config,
                                                   const std::vector<std::string>& selected,
                                                   std::vector<std::string>* notices = nullptr);

struct ActionRecord {
    enum class Kind { Sms, Post, Unsubscribe, Raise };
    Kind kind = Kind::Sms;
    int app = -1;
    std::string text; // recipient, endpoint, handler or "device.attr=value"
    bool fake = false; // Raise whose value differs from the physical state
    int seq = 0;       // number of commands logged before this action
    std::uint64_t cause = 0;
};

// Everything the apps did during one cascade.
struct CascadeRecord {
    std::vector<CommandRecord> commands;
    std::vector<ActionRecord> actions;
};

struct CompiledProperty {
    const SafetyProperty* property = nullptr;
    CompiledExpr predicate;
};

std::vector<CompiledProperty> compile_properties(const SystemModel& model,
                                                 const std::vector<SafetyProperty>& props);

struct Verdict {
    bool ok = true;
    std::string detail;
    std::vector<int> commands; // offending command log entries
    std::vector<int> actions;  // offending action entries
};

// Invariants look only at the state, command properties only at the command
// log, information-flow properties only at the executed actions. Command and
// action properties consider only offences whose last record has an index
// of at least first_command / first_action.
Verdict check(const CompiledProperty& prop, const SystemModel& model, const SystemState& state,
              const CascadeRecord& record, std::size_t first_command = 0, std::size_t first_action = 0);

} // namespace homesafe
