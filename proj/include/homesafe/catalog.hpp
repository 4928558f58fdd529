#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace homesafe {

enum class AttrAccess { Sensed, Commanded };
enum class CapabilityKind { Sensor, Actuator, Mixed };

// Reporting of a sensed attribute is suppressed while another attribute of
// the same device holds a given value (e.g. a disarmed camera).
struct Gate {
    std::string attribute;
    std::string value;
};

struct AttributeSpec {
    std::string name;
    AttrAccess access = AttrAccess::Sensed;
    bool numeric = false;
    // Default value domain. May be empty in the catalog when the system
    // configuration is required to declare it (numeric ranges, modes).
    std::vector<std::string> domain;
    std::optional<Gate> gate;
};

struct Capability {
    std::string name;
    CapabilityKind kind = CapabilityKind::Sensor;
    std::vector<AttributeSpec> attributes;

    const AttributeSpec* find(std::string_view attribute) const;
    bool readable() const { return kind != CapabilityKind::Actuator; }
    bool commandable() const { return kind != CapabilityKind::Sensor; }
};

// The set of device capabilities known to the checker. Loaded from a catalog
// file so adding a device type is a data change:
//
//   capability <name> sensor|actuator|mixed
//     sense <attr> [numeric] { v1, v2, ... } [gate <attr> = <value>]
//     command <attr> [numeric] { v1, v2, ... }
class Catalog {
public:
    static Catalog parse(std::string_view text, const std::string& origin);
    static Catalog load_file(const std::string& path);
    // The shipped catalog from the data directory.
    static const Catalog& standard();
    static std::string data_dir();

    void merge(const Catalog& other);

    const Capability* find(std::string_view name) const;
    const Capability& get(std::string_view name) const; // throws BindError
    std::vector<const Capability*> with_attribute(std::string_view attribute) const;
    const std::vector<Capability>& capabilities() const { return caps_; }

private:
    std::vector<Capability> caps_;
};

// Attribute names that never name device state: timer firings and
// scheduled calls. They appear only in dependency patterns.
bool is_pseudo_attribute(std::string_view attribute);

inline constexpr std::string_view kLocationSlot = "location";
inline constexpr std::string_view kModeAttribute = "mode";
inline constexpr std::string_view kLocationCapability = "locationMode";

} // namespace homesafe
