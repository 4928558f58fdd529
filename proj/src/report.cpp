#include "homesafe/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "homesafe/error.hpp"

namespace homesafe {

using nlohmann::json;

std::string digest(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string to_hex(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

std::string from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    if (hex.size() % 2) throw DivergenceError("malformed witness");
    std::string out;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw DivergenceError("malformed witness");
        out.push_back(static_cast<char>(hi * 16 + lo));
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

const char* outcome_name(std::uint8_t c) {
    switch (c) {
    case 0: return "ok";
    case 1: return "offline";
    default: return "lost";
    }
}

json event_json(const SystemModel& m, const ExternalEvent& e) {
    json j;
    switch (e.kind) {
    case ExternalEvent::Kind::Sensor:
        j["kind"] = "sensor";
        j["device"] = m.devices()[m.vars()[e.var].device].id;
        j["attribute"] = m.vars()[e.var].attribute;
        j["value"] = m.value_text(e.var, e.value);
        break;
    case ExternalEvent::Kind::Mode:
        j["kind"] = "mode";
        j["value"] = m.value_text(e.var, e.value);
        break;
    case ExternalEvent::Kind::Touch:
        j["kind"] = "touch";
        j["app"] = m.apps()[e.app].id;
        break;
    case ExternalEvent::Kind::Tick: j["kind"] = "tick"; break;
    }
    json outcomes = json::array();
    for (auto c : e.choices) outcomes.push_back(outcome_name(c));
    j["outcomes"] = outcomes;
    return j;
}

ExternalEvent event_from_json(const SystemModel& m, const json& j) {
    auto fail = [](const std::string& what) { throw DivergenceError("recorded event " + what); };
    ExternalEvent e;
    std::string kind = j.value("kind", "");
    if (kind == "sensor") {
        e.kind = ExternalEvent::Kind::Sensor;
        int dev = m.find_device(j.value("device", ""));
        if (dev < 0) fail("names unknown device '" + j.value("device", "") + "'");
        e.var = m.var_of(dev, j.value("attribute", ""));
        if (e.var < 0) fail("names unknown attribute '" + j.value("attribute", "") + "'");
    } else if (kind == "mode") {
        e.kind = ExternalEvent::Kind::Mode;
        e.var = m.mode_var();
    } else if (kind == "touch") {
        e.kind = ExternalEvent::Kind::Touch;
        std::string app = j.value("app", "");
        for (std::size_t i = 0; i < m.apps().size(); ++i)
            if (m.apps()[i].id == app) e.app = static_cast<int>(i);
        if (e.app < 0) fail("names unknown app '" + app + "'");
    } else if (kind == "tick") {
        e.kind = ExternalEvent::Kind::Tick;
    } else {
        fail("has unknown kind '" + kind + "'");
    }
    if (e.var >= 0) {
        e.value = m.vars()[e.var].index_of(j.value("value", ""));
        if (e.value < 0) fail("has unknown value '" + j.value("value", "") + "'");
    }
    for (const auto& o : j.value("outcomes", json::array())) {
        std::string s = o.get<std::string>();
        if (s == "ok") e.choices.push_back(0);
        else if (s == "offline") e.choices.push_back(1);
        else if (s == "lost") e.choices.push_back(2);
        else fail("has unknown outcome '" + s + "'");
    }
    return e;
}

std::string format_seconds(double s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s;
    return os.str();
}

} // namespace

std::string render_text(const CheckResult& result, const RunInfo& info) {
    std::ostringstream os;
    for (const auto& [path, d] : info.inputs) os << "input " << path << " " << d << "\n";
    std::vector<std::string> skipped;
    for (const auto& n : result.notices) {
        if (n.starts_with("property ") && n.find(" skipped:") != std::string::npos)
            skipped.push_back(n.substr(9, n.find(' ', 9) - 9));
        else
            os << "note: " << n << "\n";
    }
    if (!skipped.empty())
        os << "note: " << skipped.size() << " properties skipped, no device has one of their roles: "
           << join(skipped, ", ") << "\n";
    for (std::size_t i = 0; i < result.groups.size(); ++i) {
        const auto& g = result.groups[i];
        std::vector<std::string> sets;
        for (const auto& s : g.sets) sets.push_back(render_set(s));
        os << "group " << i + 1 << ": " << join(g.apps, ", ");
        if (!sets.empty()) os << " (sets " << join(sets, " ") << ")";
        os << ": " << g.stats.states << " states, " << g.stats.transitions << " transitions, "
           << g.violations << " violations, " << format_seconds(g.stats.seconds) << "s\n";
    }
    os << "\n";
    for (std::size_t i = 0; i < result.violations.size(); ++i) {
        const auto& v = result.violations[i].violation;
        os << "violation " << i + 1 << ": " << v.property << " [" << join(v.apps, ", ") << "]\n";
        os << "  " << v.description << "\n";
        if (!v.detail.empty()) os << "  " << v.detail << "\n";
        std::istringstream trace(render_trace(v.trace));
        for (std::string line; std::getline(trace, line);) os << "  " << line << "\n";
        os << "\n";
    }
    os << result.violations.size() << " violation" << (result.violations.size() == 1 ? "" : "s") << " in "
       << result.groups.size() << " group" << (result.groups.size() == 1 ? "" : "s") << ", "
       << result.total.states << " states, " << format_seconds(result.total.seconds) << "s\n";
    return os.str();
}

std::string render_records(const CheckResult& result, const RunInfo& info, const SystemConfig& config) {
    std::string out;
    auto emit = [&](const json& j) { out += j.dump() + "\n"; };

    json run = {{"record", "run"}, {"seed", info.seed}};
    json inputs = json::array();
    for (const auto& [path, d] : info.inputs) inputs.push_back({{"path", path}, {"digest", d}});
    run["inputs"] = inputs;
    json flags = json::object();
    for (const auto& [k, v] : info.flags) flags[k] = v;
    run["flags"] = flags;
    run["notices"] = result.notices;
    emit(run);

    for (std::size_t i = 0; i < result.groups.size(); ++i) {
        const auto& g = result.groups[i];
        std::vector<std::string> sets;
        for (const auto& s : g.sets) sets.push_back(render_set(s));
        emit({{"record", "group"},
              {"index", i},
              {"apps", g.apps},
              {"sets", sets},
              {"states", g.stats.states},
              {"transitions", g.stats.transitions},
              {"violations", g.violations}});
    }

    for (std::size_t i = 0; i < result.violations.size(); ++i) {
        const auto& gv = result.violations[i];
        const Violation& v = gv.violation;
        SystemModel model(config, gv.group);
        json events = json::array();
        for (const auto& e : v.trace.events) events.push_back(event_json(model, e));
        emit({{"record", "violation"},
              {"index", i},
              {"property", v.property},
              {"description", v.description},
              {"detail", v.detail},
              {"apps", v.apps},
              {"group", gv.group},
              {"events", events},
              {"witness", to_hex(v.witness.canonical())}});
        for (const auto& s : v.trace.steps)
            emit({{"record", "step"},
                  {"violation", i},
                  {"step", s.step},
                  {"state", s.state},
                  {"entity", s.entity},
                  {"action", s.action}});
    }
    emit({{"record", "summary"}, {"violations", result.violations.size()}, {"groups", result.groups.size()},
          {"states", result.total.states}});
    return out;
}

std::vector<RecordedViolation> parse_records(std::string_view text, const std::string& origin) {
    std::vector<RecordedViolation> out;
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(origin, lineno, 1, std::string("malformed record: ") + e.what());
        }
        std::string kind = j.value("record", "");
        try {
            if (kind == "violation") {
                RecordedViolation r;
                r.property = j.at("property").get<std::string>();
                r.apps = j.at("apps").get<std::vector<std::string>>();
                r.group = j.at("group").get<std::vector<std::string>>();
                r.events_json = j.at("events").dump();
                r.witness = from_hex(j.at("witness").get<std::string>());
                out.push_back(std::move(r));
            } else if (kind == "step") {
                if (out.empty()) throw ParseError(origin, lineno, 1, "step record before any violation");
                TraceStep s;
                s.step = j.at("step").get<int>();
                s.state = j.at("state").get<int>();
                s.entity = j.at("entity").get<std::string>();
                s.action = j.at("action").get<std::string>();
                out.back().steps.push_back(std::move(s));
            }
        } catch (const json::exception& e) {
            throw ParseError(origin, lineno, 1, std::string("incomplete record: ") + e.what());
        }
    }
    return out;
}

Trace resolve_trace(const SystemModel& model, const RecordedViolation& rec) {
    Trace t;
    for (const auto& e : json::parse(rec.events_json)) t.events.push_back(event_from_json(model, e));
    t.steps = rec.steps;
    return t;
}

} // namespace homesafe
