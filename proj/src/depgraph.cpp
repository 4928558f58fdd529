#include "homesafe/depgraph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "homesafe/catalog.hpp"

namespace homesafe {

std::vector<int> DependencyGraph::children(int v) const {
    std::vector<int> out;
    for (auto [a, b] : edges)
        if (a == v) out.push_back(b);
    return out;
}

std::vector<int> DependencyGraph::parents(int v) const {
    std::vector<int> out;
    for (auto [a, b] : edges)
        if (b == v) out.push_back(a);
    return out;
}

bool DependencyGraph::is_leaf(int v) const {
    return std::none_of(edges.begin(), edges.end(), [v](auto e) { return e.first == v; });
}

std::set<int> DependencyGraph::ancestors(int v) const {
    std::set<int> seen;
    std::vector<int> work{v};
    while (!work.empty()) {
        int x = work.back();
        work.pop_back();
        for (int p : parents(x))
            if (seen.insert(p).second) work.push_back(p);
    }
    seen.erase(v);
    return seen;
}

std::string DependencyGraph::label(int v) const {
    const auto& members = vertices.at(v).members;
    auto name = [&](int h) { return handlers[h].origin.app + "." + handlers[h].origin.handler; };
    if (members.size() == 1) return name(members.front());
    std::string out = "{";
    for (std::size_t i = 0; i < members.size(); ++i) out += (i ? ", " : "") + name(members[i]);
    return out + "}";
}

std::vector<HandlerNode> collect_handlers(const std::vector<AppSpec>& apps, const Catalog& catalog) {
    std::vector<HandlerNode> out;
    for (const auto& app : apps)
        for (auto& io : extract_io_events(app, catalog))
            out.push_back({{app.name, io.handler}, std::move(io.inputs), std::move(io.outputs)});
    return out;
}

namespace {

bool feeds(const PatternSet& outputs, const PatternSet& inputs) {
    for (const auto& o : outputs)
        for (const auto& i : inputs)
            if (overlaps(o, i)) return true;
    return false;
}

// Tarjan's algorithm; returns a component index per node.
std::vector<int> strongly_connected(int n, const std::vector<std::vector<int>>& adj) {
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, comps = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = comps;
            } while (w != v);
            ++comps;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comp;
}

} // namespace

DependencyGraph build_graph(std::vector<HandlerNode> handlers) {
    DependencyGraph g;
    g.handlers = std::move(handlers);
    const int n = static_cast<int>(g.handlers.size());
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v && feeds(g.handlers[u].outputs, g.handlers[v].inputs)) adj[u].push_back(v);

    // Number components by their smallest member so an acyclic input keeps
    // its handler positions as vertex ids.
    std::vector<int> comp = strongly_connected(n, adj);
    std::map<int, int> first_member;
    for (int v = 0; v < n; ++v)
        if (!first_member.count(comp[v])) first_member[comp[v]] = v;
    std::vector<std::pair<int, int>> order;
    for (auto [c, m] : first_member) order.emplace_back(m, c);
    std::sort(order.begin(), order.end());
    std::map<int, int> renumber;
    for (std::size_t i = 0; i < order.size(); ++i) renumber[order[i].second] = static_cast<int>(i);

    g.vertices.resize(order.size());
    g.vertex_of.resize(n);
    for (int v = 0; v < n; ++v) {
        int id = renumber[comp[v]];
        g.vertex_of[v] = id;
        HandlerVertex& hv = g.vertices[id];
        hv.id = id;
        hv.members.push_back(v);
        hv.inputs.insert(g.handlers[v].inputs.begin(), g.handlers[v].inputs.end());
        hv.outputs.insert(g.handlers[v].outputs.begin(), g.handlers[v].outputs.end());
    }
    for (int u = 0; u < n; ++u)
        for (int v : adj[u])
            if (g.vertex_of[u] != g.vertex_of[v]) g.edges.emplace(g.vertex_of[u], g.vertex_of[v]);
    return g;
}

std::vector<RelatedSet> related_sets(const DependencyGraph& g) {
    std::vector<RelatedSet> out;
    for (const auto& v : g.vertices) {
        if (!g.is_leaf(v.id)) continue;
        RelatedSet s = g.ancestors(v.id);
        s.insert(v.id);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<RelatedSet> merge_conflicts(const DependencyGraph& g, const std::vector<RelatedSet>&) {
    auto clash = [](const PatternSet& a, const PatternSet& b) {
        for (const auto& x : a) {
            if (is_pseudo_attribute(x.attribute)) continue;
            for (const auto& y : b)
                if (conflicts(x, y)) return true;
        }
        return false;
    };
    std::vector<RelatedSet> out;
    const int n = static_cast<int>(g.vertices.size());
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (!clash(g.vertices[u].outputs, g.vertices[v].outputs)) continue;
            RelatedSet s = g.ancestors(u);
            auto av = g.ancestors(v);
            s.insert(av.begin(), av.end());
            s.insert(u);
            s.insert(v);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<RelatedSet> prune_subsets(std::vector<RelatedSet> sets) {
    std::sort(sets.begin(), sets.end(), [](const RelatedSet& a, const RelatedSet& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<RelatedSet> out;
    for (const auto& s : sets) {
        bool covered = std::any_of(out.begin(), out.end(), [&](const RelatedSet& big) {
            return std::includes(big.begin(), big.end(), s.begin(), s.end());
        });
        if (!covered) out.push_back(s);
    }
    return out;
}

DependencyAnalysis analyze_dependencies(std::vector<HandlerNode> handlers) {
    DependencyAnalysis a;
    a.graph = build_graph(std::move(handlers));
    a.initial = related_sets(a.graph);
    a.conflicting = merge_conflicts(a.graph, a.initial);
    std::vector<RelatedSet> all = a.initial;
    all.insert(all.end(), a.conflicting.begin(), a.conflicting.end());
    a.final_sets = prune_subsets(std::move(all));
    return a;
}

std::vector<std::string> apps_of(const DependencyGraph& g, const RelatedSet& set) {
    std::vector<int> hs;
    for (int v : set) hs.insert(hs.end(), g.vertices.at(v).members.begin(), g.vertices.at(v).members.end());
    std::sort(hs.begin(), hs.end());
    std::vector<std::string> out;
    for (int h : hs) {
        const std::string& app = g.handlers[h].origin.app;
        if (std::find(out.begin(), out.end(), app) == out.end()) out.push_back(app);
    }
    return out;
}

std::size_t handler_count(const DependencyGraph& g, const RelatedSet& set) {
    std::size_t n = 0;
    for (int v : set) n += g.vertices.at(v).members.size();
    return n;
}

std::string render_set(const RelatedSet& set) {
    std::string out = "{";
    bool first = true;
    for (int v : set) {
        out += (first ? "" : ",") + std::to_string(v);
        first = false;
    }
    return out + "}";
}

namespace {

std::string join_patterns(const PatternSet& ps) {
    std::string out;
    for (const auto& p : ps) out += (out.empty() ? "" : ", ") + p.str();
    return out.empty() ? "-" : out;
}

std::string join_sets(const std::vector<RelatedSet>& sets) {
    std::string out;
    for (const auto& s : sets) out += (out.empty() ? "" : " ") + render_set(s);
    return out.empty() ? "(none)" : out;
}

} // namespace

std::string render_table(const DependencyAnalysis& a) {
    const DependencyGraph& g = a.graph;
    std::ostringstream os;
    os << "vertex  handler                                   inputs  ->  outputs\n";
    for (const auto& v : g.vertices) {
        std::string label = g.label(v.id);
        os << v.id << std::string(v.id < 10 ? 7 : 6, ' ') << label;
        if (label.size() < 42) os << std::string(42 - label.size(), ' ');
        os << join_patterns(v.inputs) << "  ->  " << join_patterns(v.outputs) << "\n";
    }
    os << "edges:";
    if (g.edges.empty()) os << " (none)";
    for (auto [u, v] : g.edges) os << " " << u << "->" << v;
    os << "\ninitial related sets: " << join_sets(a.initial) << "\n";
    os << "conflicting sets: " << join_sets(a.conflicting) << "\n";
    os << "final related sets: " << join_sets(a.final_sets) << "\n";
    for (const auto& s : a.final_sets) {
        os << "  " << render_set(s) << " apps:";
        for (const auto& app : apps_of(g, s)) os << " " << app;
        os << "\n";
    }
    return os.str();
}

std::string render_dot(const DependencyGraph& g) {
    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out;
    };
    std::ostringstream os;
    os << "digraph dependencies {\n  node [shape=box];\n";
    for (const auto& v : g.vertices)
        os << "  v" << v.id << " [label=\"" << v.id << ": " << escape(g.label(v.id)) << "\"];\n";
    for (auto [u, v] : g.edges) os << "  v" << u << " -> v" << v << ";\n";
    os << "}\n";
    return os.str();
}

} // namespace homesafe
