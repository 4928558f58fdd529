#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>

namespace homesafe {

// "attribute/value"; no value means any value of the attribute.
struct EventPattern {
    std::string attribute;
    std::optional<std::string> value;

    static EventPattern any(std::string attribute) { return {std::move(attribute), std::nullopt}; }
    static EventPattern exact(std::string attribute, std::string value) {
        return {std::move(attribute), std::move(value)};
    }

    bool wildcard() const { return !value.has_value(); }
    std::string str() const { return attribute + "/" + (value ? *value : std::string("...")); }

    auto operator<=>(const EventPattern&) const = default;
    bool operator==(const EventPattern&) const = default;
};

using PatternSet = std::set<EventPattern>;

// Same attribute and the values can coincide.
inline bool overlaps(const EventPattern& a, const EventPattern& b) {
    return a.attribute == b.attribute && (a.wildcard() || b.wildcard() || *a.value == *b.value);
}

// Same attribute and the values can differ.
inline bool conflicts(const EventPattern& a, const EventPattern& b) {
    return a.attribute == b.attribute && (a.wildcard() || b.wildcard() || *a.value != *b.value);
}

} // namespace homesafe
