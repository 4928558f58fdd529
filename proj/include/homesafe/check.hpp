#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homesafe/config.hpp"
#include "homesafe/depgraph.hpp"
#include "homesafe/explorer.hpp"
#include "homesafe/properties.hpp"

namespace homesafe {

struct CheckOptions {
    ExplorationConfig explore;
    std::vector<std::string> props; // empty or "all": the whole catalog
    // Explore all instances together instead of one group per related set.
    bool monolithic = false;
    const PropertyCatalog* catalog = nullptr; // standard catalog when null
};

struct GroupRun {
    std::vector<std::string> apps; // instance ids, sorted
    std::vector<RelatedSet> sets;  // related sets that produced this group
    ExplorationStats stats;
    std::size_t violations = 0;
};

struct GroupViolation {
    Violation violation;
    std::vector<std::string> group; // instances the violation was found with
};

struct CheckResult {
    std::vector<std::string> notices;
    DependencyAnalysis deps;
    std::vector<GroupRun> groups;
    std::vector<GroupViolation> violations; // sorted by property, then apps
    ExplorationStats total;
};

// Dependency analysis over the installed instances, one exploration per
// distinct group of instances, and the union of the violations found. Per
// property only violations with a minimal set of involved apps are kept.
CheckResult run_check(const SystemConfig& config, const CheckOptions& options);

// Sets of vertices from different apps that one external event can start
// and that issue overlapping commands.
std::vector<RelatedSet> repeat_sets(const DependencyGraph& g);

// Instances of the config as app specs renamed to the instance ids, in
// config order. Their handlers are the vertices of the dependency graph.
std::vector<AppSpec> instance_specs(const SystemConfig& config);

} // namespace homesafe
