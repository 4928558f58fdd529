#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "homesafe/appdsl.hpp"
#include "homesafe/pattern.hpp"

namespace homesafe {

struct HandlerOrigin {
    std::string app;
    std::string handler;

    auto operator<=>(const HandlerOrigin&) const = default;
};

struct HandlerNode {
    HandlerOrigin origin;
    PatternSet inputs;
    PatternSet outputs;
};

// A vertex of the condensed graph. Plain handlers have one member; a strongly
// connected component becomes one composite vertex with the union of its
// members' patterns.
struct HandlerVertex {
    int id = 0;
    std::vector<int> members; // indices into DependencyGraph::handlers
    PatternSet inputs;
    PatternSet outputs;
};

using RelatedSet = std::set<int>;

struct DependencyGraph {
    std::vector<HandlerNode> handlers;
    std::vector<HandlerVertex> vertices;
    std::set<std::pair<int, int>> edges;
    std::vector<int> vertex_of; // handler index -> vertex id

    std::vector<int> children(int v) const;
    std::vector<int> parents(int v) const;
    bool is_leaf(int v) const;
    std::set<int> ancestors(int v) const;
    std::string label(int v) const; // "App.handler" or "{A.h, B.g}"
};

// Handlers of the given apps in app order, then declaration order. Their
// positions are the vertex ids of an acyclic graph.
std::vector<HandlerNode> collect_handlers(const std::vector<AppSpec>& apps, const Catalog& catalog);

DependencyGraph build_graph(std::vector<HandlerNode> handlers);

std::vector<RelatedSet> related_sets(const DependencyGraph& g);
std::vector<RelatedSet> merge_conflicts(const DependencyGraph& g, const std::vector<RelatedSet>& sets);
// Drops duplicates and sets contained in another. Ordered by descending size,
// then lexicographically.
std::vector<RelatedSet> prune_subsets(std::vector<RelatedSet> sets);

struct DependencyAnalysis {
    DependencyGraph graph;
    std::vector<RelatedSet> initial;
    std::vector<RelatedSet> conflicting;
    std::vector<RelatedSet> final_sets;
};

DependencyAnalysis analyze_dependencies(std::vector<HandlerNode> handlers);

// Apps owning the handlers of a set, in handler order.
std::vector<std::string> apps_of(const DependencyGraph& g, const RelatedSet& set);
std::size_t handler_count(const DependencyGraph& g, const RelatedSet& set);

std::string render_set(const RelatedSet& set);
std::string render_table(const DependencyAnalysis& a);
std::string render_dot(const DependencyGraph& g);

} // namespace homesafe
