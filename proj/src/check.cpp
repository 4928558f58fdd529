#include "homesafe/check.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace homesafe {

std::vector<AppSpec> instance_specs(const SystemConfig& config) {
    std::vector<AppSpec> out;
    for (const auto& inst : config.apps) {
        AppSpec spec = config.spec_of(inst);
        spec.name = inst.id;
        out.push_back(std::move(spec));
    }
    return out;
}

namespace {

bool subset_of(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// External event patterns that can start a cascade reaching vertex v. A
// touch belongs to one app, so it is tagged with the app's name.
PatternSet trigger_patterns(const DependencyGraph& g, int v) {
    PatternSet out;
    std::set<int> reach = g.ancestors(v);
    reach.insert(v);
    for (int u : reach) {
        for (const auto& p : g.vertices[u].inputs) {
            if (p.attribute == "app") {
                for (int m : g.vertices[u].members)
                    out.insert(EventPattern::exact("app", g.handlers[m].origin.app));
            } else if (p.attribute != "timer") {
                out.insert(p);
            }
        }
    }
    return out;
}

bool any_overlap(const PatternSet& a, const PatternSet& b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (overlaps(x, y)) return true;
    return false;
}

} // namespace

// Related sets do not join handlers that send the same command, so two apps
// that repeat a command for one external event would be checked apart. This
// adds a set for every pair of vertices from different apps that can be
// started by the same external event and issue overlapping commands.
std::vector<RelatedSet> repeat_sets(const DependencyGraph& g) {
    std::vector<PatternSet> triggers;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) triggers.push_back(trigger_patterns(g, static_cast<int>(v)));
    std::vector<RelatedSet> out;
    for (std::size_t u = 0; u < g.vertices.size(); ++u) {
        for (std::size_t v = u + 1; v < g.vertices.size(); ++v) {
            std::vector<std::string> au = apps_of(g, {static_cast<int>(u)});
            std::vector<std::string> av = apps_of(g, {static_cast<int>(v)});
            if (au == av) continue;
            PatternSet ou, ov;
            for (const auto& p : g.vertices[u].outputs)
                if (!is_pseudo_attribute(p.attribute)) ou.insert(p);
            for (const auto& p : g.vertices[v].outputs)
                if (!is_pseudo_attribute(p.attribute)) ov.insert(p);
            if (!any_overlap(ou, ov) || !any_overlap(triggers[u], triggers[v])) continue;
            RelatedSet set = g.ancestors(static_cast<int>(u));
            for (int a : g.ancestors(static_cast<int>(v))) set.insert(a);
            set.insert(static_cast<int>(u));
            set.insert(static_cast<int>(v));
            out.push_back(set);
        }
    }
    return prune_subsets(out);
}

CheckResult run_check(const SystemConfig& config, const CheckOptions& options) {
    CheckResult result;
    const PropertyCatalog& catalog = options.catalog ? *options.catalog : PropertyCatalog::standard();
    std::vector<SafetyProperty> props = instantiate_properties(catalog, config, options.props, &result.notices);

    result.deps = analyze_dependencies(collect_handlers(instance_specs(config), *config.catalog));

    std::map<std::vector<std::string>, std::vector<RelatedSet>> groups;
    if (options.monolithic) {
        std::vector<std::string> all;
        for (const auto& inst : config.apps) all.push_back(inst.id);
        std::sort(all.begin(), all.end());
        if (!all.empty()) groups[all] = {};
    } else {
        std::vector<RelatedSet> sets = result.deps.final_sets;
        for (auto& extra : repeat_sets(result.deps.graph)) {
            bool covered = std::any_of(sets.begin(), sets.end(), [&](const RelatedSet& s) {
                return std::includes(s.begin(), s.end(), extra.begin(), extra.end());
            });
            if (!covered) sets.push_back(extra);
        }
        for (const auto& set : sets) {
            std::vector<std::string> apps = apps_of(result.deps.graph, set);
            std::sort(apps.begin(), apps.end());
            apps.erase(std::unique(apps.begin(), apps.end()), apps.end());
            groups[apps].push_back(set);
        }
    }

    std::map<std::pair<std::string, std::vector<std::string>>, GroupViolation> found;
    for (auto& [apps, sets] : groups) {
        SystemModel model(config, apps);
        ExplorationResult r = explore(model, props, options.explore);
        GroupRun run;
        run.apps = apps;
        run.sets = sets;
        run.stats = r.stats;
        run.violations = r.violations.size();
        result.groups.push_back(run);

        result.total.states += r.stats.states;
        result.total.transitions += r.stats.transitions;
        result.total.revisits += r.stats.revisits;
        result.total.leaves += r.stats.leaves;
        result.total.depth = std::max(result.total.depth, r.stats.depth);
        result.total.seconds += r.stats.seconds;

        for (auto& v : r.violations) {
            std::vector<std::string> involved = v.apps;
            std::sort(involved.begin(), involved.end());
            auto key = std::make_pair(v.property, involved);
            auto it = found.find(key);
            // Keep the shortest witness; ties go to the group seen first.
            if (it == found.end() || v.trace.events.size() < it->second.violation.trace.events.size())
                found[key] = GroupViolation{std::move(v), apps};
        }
    }

    for (auto& [key, gv] : found) {
        bool dominated = false;
        for (const auto& [other, unused] : found) {
            if (other.first == key.first && other.second != key.second && subset_of(other.second, key.second)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) result.violations.push_back(std::move(gv));
    }
    return result;
}

} // namespace homesafe
