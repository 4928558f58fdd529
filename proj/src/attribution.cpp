#include "homesafe/attribution.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "homesafe/check.hpp"
#include "homesafe/error.hpp"

namespace homesafe {

std::string AppConfiguration::describe() const {
    std::string out;
    for (const auto& [slot, ids] : bindings) {
        if (!out.empty()) out += " ";
        out += slot + "=";
        for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i];
    }
    for (const auto& [name, value] : params) {
        if (!out.empty()) out += " ";
        out += name + "=" + value;
    }
    return out;
}

std::string_view to_string(AttributionKind kind) {
    switch (kind) {
    case AttributionKind::Malicious: return "Malicious";
    case AttributionKind::BadApp: return "BadApp";
    case AttributionKind::Misconfiguration: return "Misconfiguration";
    case AttributionKind::Clean: return "Clean";
    }
    return "?";
}

namespace {

// The options of one dimension of the configuration space.
struct Dimension {
    bool slot = true;
    std::string name;
    std::vector<std::vector<std::string>> choices;
};

std::vector<std::string> param_values(const ParamDecl& p) {
    if (!p.numeric) return p.domain;
    std::vector<std::pair<long, std::string>> nums;
    for (const auto& v : p.domain) nums.emplace_back(std::stol(v), v);
    std::sort(nums.begin(), nums.end());
    std::vector<std::string> out;
    for (std::size_t i : {std::size_t{0}, (nums.size() - 1) / 2, nums.size() - 1})
        if (std::find(out.begin(), out.end(), nums[i].second) == out.end()) out.push_back(nums[i].second);
    return out;
}

std::vector<Dimension> dimensions(const AppSpec& app, const SystemConfig& inventory) {
    std::vector<Dimension> dims;
    for (const auto& slot : app.slots) {
        std::vector<std::string> ids;
        for (const auto& d : inventory.devices)
            if (d.capability == slot.capability) ids.push_back(d.id);
        if (ids.empty())
            throw ConfigError(app.name + ": no device with capability '" + slot.capability + "' for slot '" +
                              slot.name + "'");
        Dimension dim{true, slot.name, {}};
        if (slot.multiplicity == Multiplicity::One) {
            for (const auto& id : ids) dim.choices.push_back({id});
        } else {
            if (ids.size() > 16) throw ConfigError(app.name + ": too many devices for slot '" + slot.name + "'");
            std::vector<std::uint32_t> masks(((1u << ids.size()) - 1));
            std::iota(masks.begin(), masks.end(), 1u);
            std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
                return std::popcount(a) < std::popcount(b);
            });
            for (auto m : masks) {
                std::vector<std::string> subset;
                for (std::size_t i = 0; i < ids.size(); ++i)
                    if (m & (1u << i)) subset.push_back(ids[i]);
                dim.choices.push_back(subset);
            }
        }
        dims.push_back(std::move(dim));
    }
    for (const auto& p : app.params) {
        Dimension dim{false, p.name, {}};
        for (auto& v : param_values(p)) dim.choices.push_back({v});
        dims.push_back(std::move(dim));
    }
    return dims;
}

AppConfiguration at(const std::vector<Dimension>& dims, const std::vector<std::size_t>& pick) {
    AppConfiguration c;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto& choice = dims[i].choices[pick[i]];
        if (dims[i].slot) c.bindings[dims[i].name] = choice;
        else c.params[dims[i].name] = choice.front();
    }
    return c;
}

// Mixed-radix decoding with the last dimension varying fastest.
std::vector<std::size_t> decode(const std::vector<Dimension>& dims, std::uint64_t index) {
    std::vector<std::size_t> pick(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
        pick[i] = index % dims[i].choices.size();
        index /= dims[i].choices.size();
    }
    return pick;
}

std::uint64_t encode(const std::vector<Dimension>& dims, const std::vector<std::size_t>& pick) {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) index = index * dims[i].choices.size() + pick[i];
    return index;
}

} // namespace

std::vector<AppConfiguration> enumerate_configs(const AppSpec& app, const SystemConfig& inventory,
                                                const EnumerationLimits& limits) {
    std::vector<Dimension> dims = dimensions(app, inventory);
    std::uint64_t total = 1;
    bool overflow = false;
    for (const auto& d : dims) {
        if (total > (std::uint64_t{1} << 40) / d.choices.size()) overflow = true;
        else total *= d.choices.size();
    }

    std::vector<AppConfiguration> out;
    if (!overflow && total <= limits.cap) {
        for (std::uint64_t i = 0; i < total; ++i) out.push_back(at(dims, decode(dims, i)));
        return out;
    }

    // Coverage rows first: row r uses option r of every dimension (wrapping),
    // so each option of each dimension appears at least once.
    std::set<std::uint64_t> chosen;
    std::set<std::vector<std::size_t>> picks;
    std::size_t rows = 0;
    for (const auto& d : dims) rows = std::max(rows, d.choices.size());
    std::mt19937_64 rng(limits.seed);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<std::size_t> pick(dims.size());
        for (std::size_t i = 0; i < dims.size(); ++i) pick[i] = r % dims[i].choices.size();
        picks.insert(pick);
    }
    std::size_t target = std::max(limits.cap, picks.size());
    while (picks.size() < target) {
        std::vector<std::size_t> pick(dims.size());
        for (std::size_t i = 0; i < dims.size(); ++i)
            pick[i] = std::uniform_int_distribution<std::size_t>(0, dims[i].choices.size() - 1)(rng);
        picks.insert(pick);
    }
    std::vector<std::pair<std::uint64_t, std::vector<std::size_t>>> ordered;
    for (const auto& p : picks) ordered.emplace_back(overflow ? 0 : encode(dims, p), p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [unused, p] : ordered) out.push_back(at(dims, p));
    return out;
}

namespace {

const std::string kNewInstance = "candidate";

ConfigOutcome evaluate(const AppSpec& app, const AppConfiguration& cfg, const SystemConfig& inventory,
                       bool with_installed, const AttributionOptions& options, std::vector<std::string>& notices) {
    ConfigOutcome out;
    out.config = cfg;
    try {
        SystemConfig sys = inventory;
        if (!with_installed) sys.apps.clear();
        std::string id = kNewInstance;
        while (sys.find_app(id)) id += "_";
        sys.library.push_back(app);
        AppInstance inst;
        inst.id = id;
        inst.app = app.name;
        inst.bindings = cfg.bindings;
        inst.params = cfg.params;
        sys.apps.push_back(inst);
        sys.validate();

        CheckOptions co;
        co.explore = options.explore;
        co.props = options.props;
        co.catalog = options.catalog;
        CheckResult r = run_check(sys, co);
        for (const auto& n : r.notices)
            if (std::find(notices.begin(), notices.end(), n) == notices.end()) notices.push_back(n);
        std::set<std::string> props;
        for (const auto& gv : r.violations) {
            const auto& apps = gv.violation.apps;
            if (std::find(apps.begin(), apps.end(), id) != apps.end()) props.insert(gv.violation.property);
        }
        out.properties.assign(props.begin(), props.end());
        out.outcome = props.empty() ? Outcome::Safe : Outcome::Violating;
    } catch (const Error& e) {
        out.outcome = Outcome::Inconclusive;
        out.error = e.what();
    }
    return out;
}

double share(const std::vector<ConfigOutcome>& outcomes) {
    std::size_t decided = 0, violating = 0;
    for (const auto& o : outcomes) {
        if (o.outcome == Outcome::Inconclusive) continue;
        ++decided;
        if (o.outcome == Outcome::Violating) ++violating;
    }
    return decided ? static_cast<double>(violating) / static_cast<double>(decided) : 0.0;
}

} // namespace

Attribution attribute(const AppSpec& app, const SystemConfig& inventory, const AttributionOptions& options) {
    Attribution a;
    a.app = app.name;
    std::vector<AppConfiguration> configs = enumerate_configs(app, inventory, options.limits);

    for (const auto& cfg : configs) a.alone.push_back(evaluate(app, cfg, inventory, false, options, a.notices));
    a.phase1 = share(a.alone);
    if (a.phase1 >= options.threshold) {
        a.verdict = AttributionKind::Malicious;
        return a;
    }

    a.phase2_run = true;
    for (const auto& cfg : configs) a.joint.push_back(evaluate(app, cfg, inventory, true, options, a.notices));
    a.phase2 = share(a.joint);

    // A configuration is unsafe when it violates in either phase.
    std::vector<bool> unsafe(configs.size());
    bool any_unsafe = false, any_safe = false;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        bool decided = a.alone[i].outcome != Outcome::Inconclusive && a.joint[i].outcome != Outcome::Inconclusive;
        unsafe[i] = a.alone[i].outcome == Outcome::Violating || a.joint[i].outcome == Outcome::Violating;
        if (unsafe[i]) any_unsafe = true;
        if (decided && !unsafe[i]) {
            any_safe = true;
            a.safe_configs.push_back(configs[i]);
        }
    }

    if (a.phase2 >= options.threshold) a.verdict = AttributionKind::BadApp;
    else if (any_unsafe && any_safe) a.verdict = AttributionKind::Misconfiguration;
    else if (any_unsafe) a.verdict = AttributionKind::BadApp;
    else a.verdict = AttributionKind::Clean;
    if (a.verdict != AttributionKind::Misconfiguration) a.safe_configs.clear();
    return a;
}

std::string render_attribution(const Attribution& a, bool verbose) {
    std::ostringstream os;
    auto pct = [](double r) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(3) << r;
        return s.str();
    };
    auto list = [&](const char* phase, const std::vector<ConfigOutcome>& outcomes) {
        for (const auto& o : outcomes) {
            os << phase << " " << o.config.describe() << ": ";
            if (o.outcome == Outcome::Inconclusive) os << "inconclusive (" << o.error << ")";
            else if (o.outcome == Outcome::Safe) os << "safe";
            else {
                os << "violates";
                for (const auto& p : o.properties) os << " " << p;
            }
            os << "\n";
        }
    };
    if (verbose) {
        for (const auto& n : a.notices) os << "note: " << n << "\n";
        list("alone", a.alone);
        if (a.phase2_run) list("joint", a.joint);
    }
    for (const auto& c : a.safe_configs) os << "safe configuration: " << c.describe() << "\n";
    os << "VERDICT " << a.app << " " << to_string(a.verdict) << " phase1=" << pct(a.phase1);
    os << " phase2=" << (a.phase2_run ? pct(a.phase2) : std::string("-")) << "\n";
    return os.str();
}

} // namespace homesafe
