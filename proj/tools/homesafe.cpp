// Command-line front end: check, deps, replay, attribute, import-ifttt.

#include <iostream>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "homesafe/attribution.hpp"
#include "homesafe/check.hpp"
#include "homesafe/depgraph.hpp"
#include "homesafe/error.hpp"
#include "homesafe/ifttt.hpp"
#include "homesafe/inputs.hpp"
#include "homesafe/report.hpp"

using namespace homesafe;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 2;

struct Inputs {
    std::vector<std::string> apps;
    std::string config;
    std::string rules;
    std::string catalog;
};

struct SearchFlags {
    int events = 1;
    bool failures = false;
    bool comm_failures = false;
    int max_failures = 1;
    std::string store = "exact";
    std::uint64_t bits = 1ull << 24;
    int hashes = 3;
    std::vector<std::string> props;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool vary_all = false;
    int max_steps = 256;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool need_config) {
    cmd->add_option("apps", in.apps, "App files or directories of *.app files");
    auto* c = cmd->add_option("--config", in.config, "System configuration");
    if (need_config) c->required();
    cmd->add_option("--ifttt", in.rules, "Trigger-action rules to install as apps");
    cmd->add_option("--catalog", in.catalog, "Extra capability catalog");
}

void add_search(CLI::App* cmd, SearchFlags& f) {
    cmd->add_option("--events", f.events, "Maximum number of external events (K)")->check(CLI::Range(1, 64));
    cmd->add_flag("--failures", f.failures, "Explore devices going offline");
    cmd->add_flag("--comm-failures", f.comm_failures, "Explore lost commands and reports");
    cmd->add_option("--max-failures", f.max_failures, "Failures per run")->check(CLI::Range(0, 255));
    cmd->add_option("--store", f.store, "Visited-state store")->check(CLI::IsMember({"exact", "bitstate"}));
    cmd->add_option("--bits", f.bits, "Bitstate table size in bits (power of two)");
    cmd->add_option("--hashes", f.hashes, "Bitstate hash functions")->check(CLI::Range(1, 16));
    cmd->add_option("--props", f.props, "Property ids, or 'all'")->delimiter(',');
    cmd->add_option("--seed", f.seed, "Seed for sampled enumeration");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::Range(1, 256));
    cmd->add_flag("--vary-all-sensors", f.vary_all, "Vary sensors no app observes");
    cmd->add_option("--max-steps", f.max_steps, "Handler invocations per cascade before an event loop is reported");
}

ExplorationConfig exploration(const SearchFlags& f) {
    ExplorationConfig ec;
    ec.max_events = f.events;
    ec.failures = f.failures;
    ec.comm_failures = f.comm_failures;
    ec.max_failures = f.max_failures;
    ec.store = parse_store_kind(f.store);
    ec.bits = f.bits;
    ec.hashes = f.hashes;
    ec.jobs = f.jobs;
    ec.vary_all_sensors = f.vary_all;
    ec.max_steps_per_cascade = f.max_steps;
    return ec;
}

const Catalog& catalog_for(const Inputs& in) {
    static std::optional<Catalog> extended;
    if (in.rules.empty() && in.catalog.empty()) return Catalog::standard();
    extended = in.rules.empty() ? Catalog::standard() : ifttt_catalog();
    if (!in.catalog.empty()) extended->merge(Catalog::load_file(in.catalog));
    return *extended;
}

struct Loaded {
    std::vector<std::string> files;
    std::vector<AppSpec> library;
    SystemConfig config;
};

Loaded load(const Inputs& in, const Catalog& catalog) {
    Loaded l;
    l.files = expand_app_paths(in.apps);
    l.library = load_library(l.files, catalog);
    if (!in.config.empty()) {
        l.config = load_config_file(in.config, l.library, catalog);
        if (!in.rules.empty()) {
            install_rules(l.config, import_ifttt(read_file(in.rules), catalog, ServiceMap::standard(), in.rules));
            l.config.validate();
        }
    }
    return l;
}

RunInfo run_info(const Inputs& in, const Loaded& l, const SearchFlags& f, bool monolithic) {
    RunInfo info;
    for (const auto& p : l.files) info.inputs.emplace_back(p, digest(read_file(p)));
    for (const auto& p : {in.config, in.rules, in.catalog})
        if (!p.empty()) info.inputs.emplace_back(p, digest(read_file(p)));
    std::string props;
    for (std::size_t i = 0; i < f.props.size(); ++i) props += (i ? "," : "") + f.props[i];
    info.flags = {{"events", std::to_string(f.events)},
                  {"failures", f.failures ? "on" : "off"},
                  {"comm-failures", f.comm_failures ? "on" : "off"},
                  {"max-failures", std::to_string(f.max_failures)},
                  {"store", f.store},
                  {"props", props.empty() ? "all" : props},
                  {"monolithic", monolithic ? "on" : "off"},
                  {"vary-all-sensors", f.vary_all ? "on" : "off"}};
    if (f.store == "bitstate") {
        info.flags.emplace_back("bits", std::to_string(f.bits));
        info.flags.emplace_back("hashes", std::to_string(f.hashes));
    }
    info.seed = f.seed;
    return info;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounded safety checker for smart-home apps"};
    app.require_subcommand(1);

    Inputs in;
    SearchFlags flags;
    std::string format = "text";
    std::string output;
    bool monolithic = false;

    auto* check = app.add_subcommand("check", "Explore the configured system for property violations");
    add_inputs(check, in, true);
    add_search(check, flags);
    check->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "records"}));
    check->add_option("--output", output, "Write the report to a file");
    check->add_flag("--monolithic", monolithic, "Explore all apps together without decomposition");

    bool dot = false;
    auto* deps = app.add_subcommand("deps", "Print the handler dependency analysis");
    add_inputs(deps, in, false);
    deps->add_flag("--dot", dot, "Emit the dependency graph in DOT");

    std::string trace_file;
    int only = -1;
    auto* replay_cmd = app.add_subcommand("replay", "Re-execute recorded violation traces");
    add_inputs(replay_cmd, in, true);
    replay_cmd->add_option("--trace", trace_file, "Records written by check --format records")->required();
    replay_cmd->add_option("--violation", only, "Replay only this violation index");

    std::string target;
    double threshold = 0.9;
    std::size_t cap = 512;
    auto* attr = app.add_subcommand("attribute", "Classify a new app against an inventory");
    add_inputs(attr, in, true);
    add_search(attr, flags);
    attr->add_option("--app", target, "Name of the app to classify")->required();
    attr->add_option("--threshold", threshold, "Violating share for Malicious and BadApp")->check(CLI::Range(0.0, 1.0));
    attr->add_option("--cap", cap, "Maximum configurations per phase");
    bool verbose = false;
    attr->add_flag("--verbose", verbose, "List the outcome of every configuration");

    std::string rules_file;
    auto* imp = app.add_subcommand("import-ifttt", "Translate trigger-action rules into apps");
    imp->add_option("rules", rules_file, "Rule file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitClean : kExitError;
    }

    try {
        if (*check) {
            const Catalog& catalog = catalog_for(in);
            Loaded l = load(in, catalog);
            CheckOptions opts;
            opts.explore = exploration(flags);
            opts.props = flags.props;
            opts.monolithic = monolithic;
            CheckResult r = run_check(l.config, opts);
            RunInfo info = run_info(in, l, flags, monolithic);
            write_out(output, format == "records" ? render_records(r, info, l.config) : render_text(r, info));
            return r.violations.empty() ? kExitClean : kExitViolations;
        }
        if (*deps) {
            const Catalog& catalog = catalog_for(in);
            Loaded l = load(in, catalog);
            std::vector<AppSpec> specs = in.config.empty() ? l.library : instance_specs(l.config);
            DependencyAnalysis a = analyze_dependencies(collect_handlers(specs, catalog));
            std::cout << (dot ? render_dot(a.graph) : render_table(a));
            return kExitClean;
        }
        if (*replay_cmd) {
            const Catalog& catalog = catalog_for(in);
            Loaded l = load(in, catalog);
            std::string text = read_file(trace_file);
            std::vector<std::string> props;
            {
                std::istringstream lines(text);
                std::string first;
                std::getline(lines, first);
                auto j = nlohmann::json::parse(first, nullptr, false);
                if (!j.is_discarded() && j.value("record", "") == "run" && j.contains("flags"))
                    props = {j["flags"].value("props", "all")};
                if (!props.empty() && props[0] != "all") {
                    std::string all = props[0];
                    props.clear();
                    std::istringstream ids(all);
                    for (std::string id; std::getline(ids, id, ',');) props.push_back(id);
                }
            }
            std::vector<RecordedViolation> recs = parse_records(text, trace_file);
            std::vector<SafetyProperty> safety = instantiate_properties(PropertyCatalog::standard(), l.config, props);
            ExplorationConfig permissive;
            permissive.failures = true;
            permissive.comm_failures = true;
            permissive.max_failures = 255;
            for (std::size_t i = 0; i < recs.size(); ++i) {
                if (only >= 0 && static_cast<std::size_t>(only) != i) continue;
                const RecordedViolation& rec = recs[i];
                SystemModel model(l.config, rec.group);
                Trace t = resolve_trace(model, rec);
                ReplayResult rr = replay(model, safety, t, permissive);
                bool reproduced = std::find(rr.violated.begin(), rr.violated.end(), rec.property) != rr.violated.end();
                if (!reproduced) throw DivergenceError("violation " + std::to_string(i) + ": " + rec.property + " was not violated on replay");
                if (rr.state.canonical() != rec.witness)
                    throw DivergenceError("violation " + std::to_string(i) + ": final state differs from the witness");
                for (const auto& s : rr.steps) std::cout << s.line() << "\n";
                std::cout << "replay " << i << " ok: " << rec.property << " reproduced, " << rr.steps.size()
                          << " steps match\n";
            }
            return kExitClean;
        }
        if (*attr) {
            const Catalog& catalog = catalog_for(in);
            Loaded l = load(in, catalog);
            const AppSpec* spec = nullptr;
            for (const auto& s : l.library)
                if (s.name == target) spec = &s;
            if (!spec) throw BindError("no app named '" + target + "' among the given app files");
            AttributionOptions opts;
            opts.threshold = threshold;
            opts.limits.cap = cap;
            opts.limits.seed = flags.seed;
            opts.explore = exploration(flags);
            opts.props = flags.props;
            Attribution a = attribute(*spec, l.config, opts);
            std::cout << render_attribution(a, verbose);
            return kExitClean;
        }
        if (*imp) {
            for (const auto& a : import_ifttt(read_file(rules_file), ifttt_catalog(), ServiceMap::standard(), rules_file))
                std::cout << render_app(a) << "\n";
            return kExitClean;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitClean;
}
