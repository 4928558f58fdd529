#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "homesafe/check.hpp"
#include "homesafe/depgraph.hpp"

using namespace homesafe;

namespace {

using SetOfSets = std::set<RelatedSet>;

SetOfSets as_set(const std::vector<RelatedSet>& v) { return SetOfSets(v.begin(), v.end()); }

HandlerNode node(const std::string& app, const std::string& handler, PatternSet in, PatternSet out) {
    return {{app, handler}, std::move(in), std::move(out)};
}

DependencyAnalysis analyze_config(const std::string& name) {
    SystemConfig c = fixtures::config(name);
    return analyze_dependencies(collect_handlers(instance_specs(c), Catalog::standard()));
}

// Handler-level reachability by repeated relaxation over the overlap rule.
std::vector<std::vector<char>> reachability(const std::vector<HandlerNode>& hs) {
    std::size_t n = hs.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n));
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            for (const auto& o : hs[u].outputs)
                for (const auto& i : hs[v].inputs)
                    if (overlaps(o, i)) r[u][v] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v)
                if (r[u][k] && r[k][v]) r[u][v] = 1;
    return r;
}

bool covered(const std::vector<RelatedSet>& sets, int u, int v) {
    for (const auto& s : sets)
        if (s.count(u) && s.count(v)) return true;
    return false;
}

} // namespace

TEST_CASE("the five-app system yields the expected related sets") {
    DependencyAnalysis a = analyze_config("mixed");
    REQUIRE(a.graph.handlers.size() == 7);
    // Vertex 2 (the mode setter) has two children, 4 and 6.
    CHECK(a.graph.edges == std::set<std::pair<int, int>>{{2, 4}, {2, 6}});
    for (int v : {0, 1, 3, 4, 5, 6}) CHECK(a.graph.is_leaf(v));
    CHECK_FALSE(a.graph.is_leaf(2));
    // Initial, conflicting and final sets.
    CHECK(as_set(a.initial) == SetOfSets{{0}, {1}, {3}, {5}, {2, 4}, {2, 6}});
    CHECK(as_set(a.conflicting) == SetOfSets{{0, 1}, {1, 5}, {1, 2, 6}});
    CHECK(as_set(a.final_sets) == SetOfSets{{3}, {2, 4}, {0, 1}, {1, 5}, {1, 2, 6}});
}

TEST_CASE("a single handler gives one vertex and no edges") {
    auto g = build_graph({node("A", "h", {EventPattern::exact("contact", "open")}, {EventPattern::exact("switch", "on")})});
    CHECK(g.vertices.size() == 1);
    CHECK(g.edges.empty());
    CHECK(as_set(related_sets(g)) == SetOfSets{{0}});
}

TEST_CASE("an edgeless graph has one singleton set per vertex") {
    std::vector<HandlerNode> hs;
    for (int i = 0; i < 4; ++i)
        hs.push_back(node("A", "h" + std::to_string(i), {EventPattern::any("motion")},
                          {EventPattern::exact("valve" + std::to_string(i), "open")}));
    auto g = build_graph(hs);
    CHECK(as_set(related_sets(g)) == SetOfSets{{0}, {1}, {2}, {3}});
}

TEST_CASE("a chain collapses into one related set") {
    auto g = build_graph({node("A", "a", {EventPattern::any("contact")}, {EventPattern::exact("switch", "on")}),
                          node("B", "b", {EventPattern::exact("switch", "on")}, {EventPattern::exact("lock", "locked")}),
                          node("C", "c", {EventPattern::any("lock")}, {EventPattern::exact("valve", "closed")})});
    // Ancestor closure by hand: leaf 2 has ancestors {1} via lock and {0} via switch.
    CHECK(g.edges == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
    CHECK(as_set(related_sets(g)) == SetOfSets{{0, 1, 2}});
}

TEST_CASE("mutually reachable handlers are condensed into a composite vertex") {
    std::vector<HandlerNode> hs{
        node("A", "a", {EventPattern::exact("contact", "open")}, {EventPattern::exact("switch", "on")}),
        node("B", "b", {EventPattern::any("switch")}, {EventPattern::exact("switch", "on"), EventPattern::exact("contact", "open")}),
        node("C", "c", {EventPattern::any("presence")}, {EventPattern::exact("lock", "locked")})};
    auto r = reachability(hs);
    auto g = build_graph(hs);
    for (std::size_t u = 0; u < hs.size(); ++u)
        for (std::size_t v = 0; v < hs.size(); ++v) {
            bool same = u == v || (r[u][v] && r[v][u]);
            CHECK((g.vertex_of[u] == g.vertex_of[v]) == same);
        }
    const HandlerVertex& comp = g.vertices[g.vertex_of[0]];
    CHECK(comp.members.size() == 2);
    PatternSet in = hs[0].inputs, out = hs[0].outputs;
    in.insert(hs[1].inputs.begin(), hs[1].inputs.end());
    out.insert(hs[1].outputs.begin(), hs[1].outputs.end());
    CHECK(comp.inputs == in);
    CHECK(comp.outputs == out);
    for (const auto& [u, v] : g.edges) CHECK(u != v);
}

TEST_CASE("a wildcard output conflicts with a concrete output on the same attribute") {
    // Enumerate the switch domain: the wildcard can take "off", which differs from "on".
    const auto* sw = Catalog::standard().find("switch");
    REQUIRE(sw);
    bool differing = false;
    for (const auto& value : sw->find("switch")->domain) differing |= value != "on";
    REQUIRE(differing);
    auto g = build_graph({node("A", "u", {EventPattern::any("motion")}, {EventPattern::any("switch")}),
                          node("B", "v", {EventPattern::any("contact")}, {EventPattern::exact("switch", "on")})});
    CHECK(as_set(merge_conflicts(g, related_sets(g))) == SetOfSets{{0, 1}});
}

TEST_CASE("outputs on distinct attributes add no conflict sets") {
    auto g = build_graph({node("A", "u", {EventPattern::any("motion")}, {EventPattern::exact("switch", "on")}),
                          node("B", "v", {EventPattern::any("contact")}, {EventPattern::exact("lock", "locked")})});
    CHECK(merge_conflicts(g, related_sets(g)).empty());
}

TEST_CASE("pruning keeps maximal sets in a fixed order") {
    CHECK(prune_subsets({{1}, {1, 2}, {1, 2, 3}}) == std::vector<RelatedSet>{{1, 2, 3}});
    CHECK(prune_subsets({{2}, {0}, {1}}) == std::vector<RelatedSet>{{0}, {1}, {2}});
    CHECK(prune_subsets({{3}, {0, 1}, {2, 4}, {1, 5}, {1, 2, 6}, {0}, {5}}) ==
          std::vector<RelatedSet>{{1, 2, 6}, {0, 1}, {1, 5}, {2, 4}, {3}});
}

TEST_CASE("every fixture's final sets cover its edges and conflicting pairs") {
    for (const auto& name : fixtures::config_names()) {
        CAPTURE(name);
        DependencyAnalysis a = analyze_config(name);
        const auto& g = a.graph;
        for (const auto& [u, v] : g.edges) CHECK(covered(a.final_sets, u, v));
        for (std::size_t u = 0; u < g.vertices.size(); ++u)
            for (std::size_t v = u + 1; v < g.vertices.size(); ++v) {
                bool conflict = false;
                for (const auto& p : g.vertices[u].outputs)
                    for (const auto& q : g.vertices[v].outputs)
                        if (!is_pseudo_attribute(p.attribute) && conflicts(p, q)) conflict = true;
                if (conflict) CHECK(covered(a.final_sets, static_cast<int>(u), static_cast<int>(v)));
            }
        std::size_t largest = 0;
        for (const auto& s : a.final_sets) largest = std::max(largest, handler_count(g, s));
        CHECK(largest <= g.handlers.size());
        // The pipeline is idempotent on its own output.
        CHECK(prune_subsets(a.final_sets) == a.final_sets);
        auto again = a.final_sets;
        for (const auto& s : merge_conflicts(g, a.final_sets)) again.push_back(s);
        CHECK(prune_subsets(again) == a.final_sets);
    }
}

TEST_CASE("the five-app system needs at most 3 of its 7 handlers together") {
    DependencyAnalysis a = analyze_config("mixed");
    std::size_t largest = 0;
    for (const auto& s : a.final_sets) largest = std::max(largest, handler_count(a.graph, s));
    CHECK(largest == 3);
    CHECK(a.graph.handlers.size() == 7);
}

TEST_CASE("the dependency table and dot output name every vertex") {
    DependencyAnalysis a = analyze_config("mixed");
    std::string table = render_table(a);
    CHECK(table.find("AutoModeChange.presenceHandler") != std::string::npos);
    CHECK(table.find("{1,2,6}") != std::string::npos);
    std::string dot = render_dot(a.graph);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("v2 -> v4") != std::string::npos);
}
