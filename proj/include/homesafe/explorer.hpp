#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homesafe/model.hpp"
#include "homesafe/properties.hpp"
#include "homesafe/store.hpp"

namespace homesafe {

// One choice of the search: an environment change, a user action or a clock
// tick, plus the outcome picked at every failure branch point of the cascade
// it starts (0 = success; for sensors and commands 1 = device offline,
// 2 = message lost when both are possible, else the single failure kind).
// Missing trailing outcomes mean success.
struct ExternalEvent {
    enum class Kind { Sensor, Mode, Touch, Tick };

    Kind kind = Kind::Sensor;
    int var = -1;   // Sensor, Mode
    int value = -1; // Sensor, Mode
    int app = -1;   // Touch
    std::vector<std::uint8_t> choices;

    std::string describe(const SystemModel& m) const;
    bool operator==(const ExternalEvent&) const = default;
};

struct TraceStep {
    int step = 0;
    int state = 0;
    std::string entity;
    std::string action;

    std::string line() const; // "step <n> state <s>: [<entity>] <action>"
    bool operator==(const TraceStep&) const = default;
};

struct Trace {
    std::vector<ExternalEvent> events;
    std::vector<TraceStep> steps;
    std::string verdict; // "VIOLATION <id>: <description>"
};

inline constexpr const char* kEventLoopId = "event-loop";

struct Violation {
    std::string property;
    std::string description;
    std::string detail;
    std::vector<std::string> apps; // app instances that acted or missed an event on the trace
    Trace trace;
    SystemState witness;
};

struct ExplorationConfig {
    int max_events = 1;
    bool failures = false;      // device offline branches
    int max_failures = 1;       // device and message failures per run
    bool comm_failures = false; // lost command/report branches
    StoreKind store = StoreKind::Exact;
    std::uint64_t bits = 1ull << 24;
    int hashes = 3;
    int max_steps_per_cascade = 256;
    int jobs = 1;
    // Vary every sensor instead of only those the apps observe.
    bool vary_all_sensors = false;
};

struct ExplorationStats {
    std::uint64_t states = 0;      // distinct states stored
    std::uint64_t transitions = 0; // cascades executed
    std::uint64_t revisits = 0;    // successors pruned by the store
    std::uint64_t leaves = 0;      // states reached with the full event budget
    int depth = 0;                 // deepest level expanded
    double seconds = 0;
};

struct ExplorationResult {
    std::vector<Violation> violations; // sorted by property, then apps
    ExplorationStats stats;
};

// Breadth-first search over sequences of up to max_events external events.
// Each event's cascade runs to quiescence. A branch ends at its first
// violation; per property only violations with a minimal set of involved
// apps are kept, each with a shortest trace.
ExplorationResult explore(const SystemModel& model, const std::vector<SafetyProperty>& props,
                          const ExplorationConfig& config);

struct ReplayResult {
    SystemState state;
    std::vector<TraceStep> steps;
    std::vector<std::string> violated; // property ids violated by the last cascade
};

// Re-executes the events of a trace. When the trace carries steps they must
// match the regenerated ones. Throws DivergenceError otherwise.
ReplayResult replay(const SystemModel& model, const std::vector<SafetyProperty>& props, const Trace& trace,
                    const ExplorationConfig& config = {});

std::string render_trace(const Trace& trace);

} // namespace homesafe
