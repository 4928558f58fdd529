#include "homesafe/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <thread>

#include "homesafe/error.hpp"

namespace homesafe {

namespace {

enum Outcome : std::uint8_t { kDelivered = 0, kOffline = 1, kLost = 2 };

} // namespace

std::string ExternalEvent::describe(const SystemModel& m) const {
    std::string out;
    switch (kind) {
    case Kind::Sensor: out = m.var_name(var) + "=" + m.value_text(var, value); break;
    case Kind::Mode: out = "mode=" + m.value_text(var, value); break;
    case Kind::Touch: out = "touch " + m.apps()[app].id; break;
    case Kind::Tick: out = "tick"; break;
    }
    bool failed = std::any_of(choices.begin(), choices.end(), [](auto c) { return c != kDelivered; });
    if (failed) {
        out += " [";
        for (std::size_t i = 0; i < choices.size(); ++i)
            out += std::string(i ? "," : "") + (choices[i] == kDelivered ? "ok" : choices[i] == kOffline ? "offline" : "lost");
        out += "]";
    }
    return out;
}

std::string TraceStep::line() const {
    return "step " + std::to_string(step) + " state " + std::to_string(state) + ": [" + entity + "] " + action;
}

std::string render_trace(const Trace& trace) {
    std::string out;
    for (const auto& s : trace.steps) out += s.line() + "\n";
    if (!trace.verdict.empty()) out += trace.verdict + "\n";
    return out;
}

namespace {

struct Found {
    int prop = -1; // index into the compiled properties; -1 for an event loop
    std::string detail;
    std::uint64_t apps = 0; // apps whose actions led to it
};

struct CascadeResult {
    bool violated = false;
    std::vector<Found> found;
    std::vector<std::uint8_t> choices;
    std::vector<std::vector<std::uint8_t>> options; // per choice point
};

struct Stop {};

void expr_vars(const CompiledExpr& e, std::vector<char>& out) {
    for (const auto* o : {&e.lhs, &e.rhs})
        if (o->kind == CompiledOperand::Kind::Vars)
            for (int v : o->vars) out[v] = 1;
    for (const auto& a : e.args) expr_vars(a, out);
}

void written_vars(const SystemModel& m, const std::vector<CompiledStmt>& body, std::vector<char>& out,
                  std::vector<char>& seen) {
    for (const auto& st : body) {
        if (st.kind == Statement::Kind::Command)
            for (int v : st.targets) out[v] = 1;
        if (st.kind == Statement::Kind::RunIn && !seen[st.handler]) {
            seen[st.handler] = 1;
            written_vars(m, m.handlers()[st.handler].body, out, seen);
        }
        written_vars(m, st.body, out, seen);
    }
}

// Runs one external event and its cascade (the event loop of the device
// model) on a state, consuming failure outcomes from a prefix and taking the
// first available outcome once the prefix is exhausted.
class Runner {
public:
    Runner(const SystemModel& m, const std::vector<CompiledProperty>& props, const ExplorationConfig& ec,
           bool permissive)
        : m_(m), props_(props), ec_(ec), permissive_(permissive) {
        for (std::size_t i = 0; i < props.size(); ++i) {
            switch (props[i].property->kind()) {
            case PropertyKind::Invariant: invariants_.push_back(static_cast<int>(i)); break;
            case PropertyKind::ConflictFree:
            case PropertyKind::RepeatFree: command_props_.push_back(static_cast<int>(i)); break;
            case PropertyKind::Leakage:
            case PropertyKind::SensitiveCommand: action_props_.push_back(static_cast<int>(i)); break;
            case PropertyKind::Robustness: end_props_.push_back(static_cast<int>(i)); break;
            }
        }
        for (int p : invariants_) {
            reads_.emplace_back(m.vars().size());
            expr_vars(props[p].predicate, reads_.back());
        }
        for (std::size_t h = 0; h < m.handlers().size(); ++h) {
            writes_.emplace_back(m.vars().size());
            std::vector<char> seen(m.handlers().size());
            seen[h] = 1;
            written_vars(m, m.handlers()[h].body, writes_.back(), seen);
        }
    }

    void set_sink(std::vector<TraceStep>* steps, int* state_no) {
        steps_ = steps;
        state_no_ = state_no;
    }

    CascadeResult run(SystemState& s, const ExternalEvent& e, const std::vector<std::uint8_t>& prefix) {
        CascadeResult out;
        s_ = &s;
        out_ = &out;
        prefix_ = &prefix;
        pos_ = 0;
        record_ = CascadeRecord{};
        queue_.clear();
        handler_steps_ = 0;
        truth_ = truth();
        cascade_apps_ = 0;
        try {
            start(e);
            drain();
            for (int p : end_props_) check_prop(p, 0, 0);
        } catch (const Stop&) {
        }
        out.violated = !out.found.empty();
        return out;
    }

private:
    void step(const std::string& entity, const std::string& action) {
        if (steps_)
            steps_->push_back({static_cast<int>(steps_->size()) + 1, *state_no_, entity, action});
    }
    void changed() {
        if (state_no_) ++*state_no_;
    }

    std::vector<char> truth() const {
        std::vector<char> t(invariants_.size());
        for (std::size_t i = 0; i < invariants_.size(); ++i)
            t[i] = m_.eval(props_[invariants_[i]].predicate, *s_, true);
        return t;
    }

    // Invariants that an app action turned false. For a report that apps
    // missed, `writable` holds the vars those apps could have set; only
    // invariants reading one of them count. The blamed apps are those behind
    // the vars the predicate reads plus `extra`.
    void check_transition(const std::vector<char>* writable, std::uint64_t extra) {
        std::vector<char> now = truth();
        bool any = !writable || std::find(writable->begin(), writable->end(), 1) != writable->end();
        if (any) {
            for (std::size_t i = 0; i < invariants_.size(); ++i) {
                if (!truth_[i] || now[i]) continue;
                if (writable) {
                    bool related = false;
                    for (std::size_t v = 0; v < writable->size() && !related; ++v)
                        related = (*writable)[v] && reads_[i][v];
                    if (!related) continue;
                }
                Verdict v = check(props_[invariants_[i]], m_, *s_, record_);
                std::uint64_t apps = extra;
                for (std::size_t var = 0; var < reads_[i].size(); ++var)
                    if (reads_[i][var]) apps |= s_->cause[var];
                report({invariants_[i], v.detail, apps});
            }
        }
        truth_ = std::move(now);
    }

    void check_prop(int p, std::size_t first_command, std::size_t first_action) {
        Verdict v = check(props_[p], m_, *s_, record_, first_command, first_action);
        if (v.ok) return;
        std::uint64_t apps = 0;
        for (int c : v.commands) apps |= record_.commands[c].cause;
        for (int a : v.actions) apps |= record_.actions[a].cause;
        report({p, v.detail, apps});
    }

    // The cascade runs to quiescence after a violation; the branch ends
    // with it. The same finding is reported once per cascade.
    void report(Found f) {
        for (const auto& g : out_->found)
            if (g.prop == f.prop && g.apps == f.apps) return;
        step("property", "violated: " + (f.prop < 0 ? std::string(kEventLoopId) : props_[f.prop].property->id()) +
                             (f.detail.empty() ? "" : " (" + f.detail + ")"));
        out_->found.push_back(std::move(f));
    }

    bool budget() const { return s_->failures < ec_.max_failures; }

    std::uint8_t choose(int device) {
        std::vector<std::uint8_t> options{kDelivered};
        const DeviceInfo& dev = m_.devices()[device];
        if (!s_->offline[device] && device != m_.location_device()) {
            if (permissive_) {
                if (dev.failure_candidate) options.push_back(kOffline);
                options.push_back(kLost);
            } else {
                if (ec_.failures && dev.failure_candidate && budget()) options.push_back(kOffline);
                if (ec_.comm_failures && budget()) options.push_back(kLost);
            }
        }
        std::uint8_t pick = options.front();
        if (pos_ < prefix_->size()) {
            pick = (*prefix_)[pos_];
            if (std::find(options.begin(), options.end(), pick) == options.end())
                throw DivergenceError("recorded outcome is not possible for device '" + dev.id + "'");
        }
        ++pos_;
        out_->choices.push_back(pick);
        out_->options.push_back(std::move(options));
        return pick;
    }

    void enqueue(const std::vector<Notification>& notes) { queue_.insert(queue_.end(), notes.begin(), notes.end()); }

    void start(const ExternalEvent& e) {
        switch (e.kind) {
        case ExternalEvent::Kind::Sensor: {
            const VarInfo& var = m_.vars()[e.var];
            const std::string& dev = m_.devices()[var.device].id;
            std::uint8_t outcome = choose(var.device);
            std::string old = m_.value_text(e.var, s_->physical[e.var]);
            if (outcome == kOffline) {
                s_->offline[var.device] = 1;
                ++s_->failures;
                changed();
                step(dev, "goes offline");
            } else if (outcome == kLost) {
                ++s_->failures;
                changed();
                step(dev, "report lost");
            }
            int before = s_->reported[e.var];
            auto notes = sensor_state_update(m_, *s_, e.var, e.value, outcome == kDelivered);
            changed();
            step(dev, var.attribute + ": " + old + " -> " + m_.value_text(e.var, e.value) + " (environment)");
            bool suppressed = s_->reported[e.var] == before && before != e.value;
            std::vector<char> writable(m_.vars().size());
            std::uint64_t missed = 0;
            if (suppressed) {
                if (var.gate_var >= 0) missed |= s_->cause[var.gate_var];
                for (const auto& n : m_.subscribers(e.var, e.value)) {
                    if (s_->disabled[n.handler]) continue;
                    missed |= 1ull << m_.handlers()[n.handler].app;
                    for (std::size_t v = 0; v < writable.size(); ++v) writable[v] |= writes_[n.handler][v];
                    step(m_.handler_label(n.handler), "not notified of " + var.attribute + "/" + m_.value_text(e.var, e.value));
                }
            }
            check_transition(&writable, missed);
            enqueue(notes);
            break;
        }
        case ExternalEvent::Kind::Mode: {
            std::vector<CommandRecord> scratch;
            std::string old = m_.value_text(e.var, s_->reported[e.var]);
            auto notes = actuator_state_update(m_, *s_, scratch, e.var, e.value);
            s_->cause[e.var] = 0;
            changed();
            step("location", "mode: " + old + " -> " + m_.value_text(e.var, e.value) + " (user)");
            truth_ = truth();
            enqueue(notes);
            break;
        }
        case ExternalEvent::Kind::Touch:
            step(m_.apps()[e.app].id, "touched by the user");
            enqueue(m_.touch_handlers(e.app));
            break;
        case ExternalEvent::Kind::Tick: {
            if (s_->timers.empty()) throw DivergenceError("clock tick without pending timers");
            s_->clock = s_->timers.front().due;
            changed();
            step("clock", "time " + std::to_string(s_->clock));
            std::vector<Timer> keep;
            for (const auto& t : s_->timers) {
                if (t.due > s_->clock) {
                    keep.push_back(t);
                    continue;
                }
                queue_.push_back({t.handler, -1, -1, t.cause});
                const HandlerInfo& h = m_.handlers()[t.handler];
                if (h.trigger == Trigger::Kind::Schedule)
                    keep.push_back({static_cast<std::uint32_t>(s_->clock + h.period), t.handler});
            }
            std::sort(keep.begin(), keep.end());
            s_->timers = std::move(keep);
            truth_ = truth();
            break;
        }
        }
    }

    void drain() {
        while (!queue_.empty()) {
            Notification n = queue_.front();
            queue_.pop_front();
            const HandlerInfo& h = m_.handlers()[n.handler];
            if (s_->disabled[n.handler]) {
                step(m_.handler_label(n.handler), "unsubscribed, not invoked");
                continue;
            }
            if (++handler_steps_ > ec_.max_steps_per_cascade) {
                report({-1, "more than " + std::to_string(ec_.max_steps_per_cascade) +
                                " handler invocations for one external event",
                        cascade_apps_});
                throw Stop{};
            }
            cascade_apps_ |= 1ull << h.app;
            std::string cause = n.var < 0 ? (h.trigger == Trigger::Kind::Touch ? "touch" : "timer")
                                          : m_.vars()[n.var].attribute + "/" + m_.value_text(n.var, n.value);
            step(m_.handler_label(n.handler), "invoked by " + cause);
            std::uint64_t ctx = n.cause | (1ull << h.app);
            for (const auto& st : h.body) exec(st, h.app, ctx);
        }
    }

    // `ctx` holds the apps the executing code depends on: its own app, the
    // apps behind its trigger and behind the conditions that led here.
    void exec(const CompiledStmt& st, int app, std::uint64_t ctx) {
        const std::string& who = m_.apps()[app].id;
        switch (st.kind) {
        case Statement::Kind::If: {
            bool taken = m_.eval(st.condition, *s_, false);
            step(who, st.source + (taken ? " is true" : " is false"));
            if (taken) {
                std::uint64_t inner = ctx;
                for (int v : st.reads) inner |= s_->cause[v];
                for (const auto& b : st.body) exec(b, app, inner);
            }
            break;
        }
        case Statement::Kind::Block:
            for (const auto& b : st.body) exec(b, app, ctx);
            break;
        case Statement::Kind::Command:
            for (std::size_t i = 0; i < st.targets.size(); ++i)
                command(st.targets[i], st.target_values[i], app, ctx);
            break;
        case Statement::Kind::Raise:
            for (std::size_t i = 0; i < st.targets.size(); ++i) {
                int var = st.targets[i], value = st.target_values[i];
                bool fake = s_->physical[var] != value;
                s_->reported[var] = static_cast<std::uint8_t>(value);
                s_->cause[var] = ctx;
                changed();
                step(who, st.source + " on " + m_.devices()[m_.vars()[var].device].id + (fake ? " (no physical basis)" : ""));
                record_.actions.push_back({ActionRecord::Kind::Raise, app,
                                           m_.var_name(var) + "=" + m_.value_text(var, value), fake,
                                           static_cast<int>(record_.commands.size()), ctx});
                for (int p : action_props_) check_prop(p, record_.commands.size(), record_.actions.size() - 1);
                auto notes = m_.subscribers(var, value);
                for (auto& n : notes) n.cause = ctx;
                enqueue(notes);
            }
            break;
        case Statement::Kind::Sms:
        case Statement::Kind::Post:
            step(who, st.source);
            record_.actions.push_back({st.kind == Statement::Kind::Sms ? ActionRecord::Kind::Sms : ActionRecord::Kind::Post,
                                       app, st.value, false, static_cast<int>(record_.commands.size()), ctx});
            for (int p : action_props_) check_prop(p, record_.commands.size(), record_.actions.size() - 1);
            break;
        case Statement::Kind::Unsubscribe:
            s_->disabled[st.handler] = 1;
            changed();
            step(who, st.source);
            record_.actions.push_back({ActionRecord::Kind::Unsubscribe, app, m_.handler_label(st.handler), false,
                                       static_cast<int>(record_.commands.size()), ctx});
            for (int p : action_props_) check_prop(p, record_.commands.size(), record_.actions.size() - 1);
            break;
        case Statement::Kind::RunIn: {
            auto& ts = s_->timers;
            ts.erase(std::remove_if(ts.begin(), ts.end(), [&](const Timer& t) { return t.handler == st.handler; }),
                     ts.end());
            ts.push_back({static_cast<std::uint32_t>(s_->clock + st.delay), static_cast<std::uint16_t>(st.handler), ctx});
            std::sort(ts.begin(), ts.end());
            changed();
            step(who, st.source);
            break;
        }
        }
    }

    void command(int var, int value, int app, std::uint64_t ctx) {
        const VarInfo& info = m_.vars()[var];
        const std::string& dev = m_.devices()[info.device].id;
        std::uint8_t outcome = var == m_.mode_var() ? std::uint8_t{kDelivered} : choose(info.device);
        step(m_.apps()[app].id, dev + ".set(" + info.attribute + ", " + m_.value_text(var, value) + ")");
        if (outcome == kOffline) {
            s_->offline[info.device] = 1;
            ++s_->failures;
            changed();
            step(dev, "goes offline");
        } else if (outcome == kLost) {
            ++s_->failures;
            changed();
            step(dev, "command lost");
        } else if (s_->offline[info.device]) {
            step(dev, "offline, command not carried out");
        }
        int old = s_->reported[var];
        auto notes = actuator_state_update(m_, *s_, record_.commands, var, value, outcome == kDelivered, app, ctx);
        if (s_->reported[var] != old) {
            changed();
            step(dev, info.attribute + ": " + m_.value_text(var, old) + " -> " + m_.value_text(var, value));
            check_transition(nullptr, 0);
        }
        for (int p : command_props_) check_prop(p, record_.commands.size() - 1, record_.actions.size());
        enqueue(notes);
    }

    const SystemModel& m_;
    const std::vector<CompiledProperty>& props_;
    const ExplorationConfig& ec_;
    bool permissive_;
    std::vector<int> invariants_, command_props_, action_props_, end_props_;
    std::vector<std::vector<char>> reads_;  // per invariant: vars its predicate reads
    std::vector<std::vector<char>> writes_; // per handler: vars it can command

    SystemState* s_ = nullptr;
    CascadeResult* out_ = nullptr;
    const std::vector<std::uint8_t>* prefix_ = nullptr;
    std::size_t pos_ = 0;
    CascadeRecord record_;
    std::deque<Notification> queue_;
    int handler_steps_ = 0;
    std::uint64_t cascade_apps_ = 0; // apps invoked during this cascade
    std::vector<char> truth_;
    std::vector<TraceStep>* steps_ = nullptr;
    int* state_no_ = nullptr;
};

// Sensors and mode the environment and the user may change: whatever the
// apps observe plus whatever the checked invariants read.
struct EventAlphabet {
    std::vector<int> vars;
    bool mode = false;
};

EventAlphabet make_alphabet(const SystemModel& m, const std::vector<CompiledProperty>& props,
                            const ExplorationConfig& ec) {
    EventAlphabet a;
    std::vector<char> used(m.vars().size());
    for (int v : m.app_input_vars()) used[v] = 1;
    for (const auto& p : props)
        if (p.property->kind() == PropertyKind::Invariant) expr_vars(p.predicate, used);
    a.mode = m.mode_is_app_input() || used[m.mode_var()];
    for (std::size_t v = 0; v < m.vars().size(); ++v)
        if (m.vars()[v].sensed && (used[v] || ec.vary_all_sensors)) a.vars.push_back(static_cast<int>(v));
    return a;
}

std::vector<ExternalEvent> enumerate_events(const SystemModel& m, const SystemState& s, const EventAlphabet& alphabet) {
    std::vector<ExternalEvent> out;
    const std::vector<int>& vars = alphabet.vars;
    for (int v : vars) {
        for (std::size_t x = 0; x < m.vars()[v].values.size(); ++x) {
            if (static_cast<int>(x) == s.physical[v]) continue;
            ExternalEvent e;
            e.kind = ExternalEvent::Kind::Sensor;
            e.var = v;
            e.value = static_cast<int>(x);
            out.push_back(e);
        }
    }
    if (alphabet.mode) {
        int v = m.mode_var();
        for (std::size_t x = 0; x < m.vars()[v].values.size(); ++x) {
            if (static_cast<int>(x) == s.reported[v]) continue;
            ExternalEvent e;
            e.kind = ExternalEvent::Kind::Mode;
            e.var = v;
            e.value = static_cast<int>(x);
            out.push_back(e);
        }
    }
    for (std::size_t a = 0; a < m.apps().size(); ++a) {
        if (m.touch_handlers(static_cast<int>(a)).empty()) continue;
        ExternalEvent e;
        e.kind = ExternalEvent::Kind::Touch;
        e.app = static_cast<int>(a);
        out.push_back(e);
    }
    if (!s.timers.empty()) {
        ExternalEvent e;
        e.kind = ExternalEvent::Kind::Tick;
        out.push_back(e);
    }
    return out;
}

struct TraceLink {
    std::shared_ptr<const TraceLink> parent;
    ExternalEvent event;
};

std::vector<ExternalEvent> unwind(const std::shared_ptr<const TraceLink>& link) {
    std::vector<ExternalEvent> out;
    for (const TraceLink* l = link.get(); l; l = l->parent.get()) out.push_back(l->event);
    std::reverse(out.begin(), out.end());
    return out;
}

struct Node {
    SystemState state;
    std::shared_ptr<const TraceLink> trace;
};

struct RawViolation {
    std::string property;
    std::string detail;
    std::uint64_t apps = 0;
    std::shared_ptr<const TraceLink> trace;
    SystemState witness;
};

struct Expansion {
    std::vector<Node> successors;
    std::vector<RawViolation> violations;
    std::uint64_t transitions = 0;
};

Expansion expand(Runner& runner, const SystemModel& m, const std::vector<CompiledProperty>& props,
                 const EventAlphabet& alphabet, const Node& node) {
    Expansion out;
    for (const ExternalEvent& e : enumerate_events(m, node.state, alphabet)) {
        std::vector<std::uint8_t> prefix;
        for (;;) {
            SystemState s = node.state;
            CascadeResult r = runner.run(s, e, prefix);
            ++out.transitions;
            auto link = std::make_shared<TraceLink>();
            link->parent = node.trace;
            link->event = e;
            link->event.choices = r.choices;
            if (r.violated) {
                for (const auto& f : r.found)
                    out.violations.push_back({f.prop < 0 ? kEventLoopId : props[f.prop].property->id(), f.detail,
                                              f.apps, link, s});
            } else {
                out.successors.push_back({std::move(s), std::move(link)});
            }
            // Next failure outcome vector in lexicographic order.
            int i = static_cast<int>(r.choices.size()) - 1;
            for (; i >= 0; --i) {
                const auto& opts = r.options[i];
                auto at = std::find(opts.begin(), opts.end(), r.choices[i]) - opts.begin();
                if (at + 1 < static_cast<long>(opts.size())) {
                    prefix.assign(r.choices.begin(), r.choices.begin() + i);
                    prefix.push_back(opts[at + 1]);
                    break;
                }
            }
            if (i < 0) break;
        }
    }
    return out;
}

std::vector<std::string> app_names(const SystemModel& m, std::uint64_t mask) {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < m.apps().size(); ++a)
        if (mask & (1ull << a)) out.push_back(m.apps()[a].id);
    return out;
}

std::string description_of(const std::vector<SafetyProperty>& props, const std::string& id) {
    for (const auto& p : props)
        if (p.id() == id) return p.def.description;
    return "handlers keep triggering each other (possible event loop)";
}

} // namespace

ExplorationResult explore(const SystemModel& model, const std::vector<SafetyProperty>& props,
                          const ExplorationConfig& ec) {
    if (ec.max_events < 1) throw Error("the number of external events must be at least 1");
    auto started = std::chrono::steady_clock::now();
    auto compiled = compile_properties(model, props);
    EventAlphabet alphabet = make_alphabet(model, compiled, ec);
    auto store = make_store(ec.store, ec.bits, ec.hashes);
    ExplorationResult result;

    std::vector<Node> frontier;
    frontier.push_back({model.initial_state(), nullptr});
    store->insert(frontier.front().state.canonical());

    std::map<std::pair<std::string, std::uint64_t>, RawViolation> found;
    int jobs = std::max(1, ec.jobs);

    for (int depth = 1; depth <= ec.max_events && !frontier.empty(); ++depth) {
        std::vector<Expansion> expansions(frontier.size());
        if (jobs == 1 || frontier.size() < 2) {
            Runner runner(model, compiled, ec, false);
            for (std::size_t i = 0; i < frontier.size(); ++i)
                expansions[i] = expand(runner, model, compiled, alphabet, frontier[i]);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> errors(jobs);
            for (int w = 0; w < jobs; ++w) {
                workers.emplace_back([&, w] {
                    try {
                        Runner runner(model, compiled, ec, false);
                        for (std::size_t i = next++; i < frontier.size(); i = next++)
                            expansions[i] = expand(runner, model, compiled, alphabet, frontier[i]);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : workers) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        // Merge in frontier order so results do not depend on scheduling.
        std::vector<Node> next_frontier;
        for (auto& ex : expansions) {
            result.stats.transitions += ex.transitions;
            for (auto& v : ex.violations) {
                auto key = std::make_pair(v.property, v.apps);
                if (!found.count(key)) found.emplace(key, std::move(v));
            }
            for (auto& n : ex.successors) {
                if (store->insert(n.state.canonical())) {
                    ++result.stats.revisits;
                    continue;
                }
                next_frontier.push_back(std::move(n));
            }
        }
        result.stats.depth = depth;
        if (depth == ec.max_events) result.stats.leaves = next_frontier.size();
        frontier = std::move(next_frontier);
    }
    result.stats.states = store->inserted();

    // Keep, per property, only violations whose app set is minimal.
    for (auto& [key, raw] : found) {
        bool dominated = false;
        for (const auto& [other, _] : found) {
            if (other.first != key.first || other.second == key.second) continue;
            if ((other.second & key.second) == other.second) dominated = true;
        }
        if (dominated) continue;
        Violation v;
        v.property = raw.property;
        v.description = description_of(props, raw.property);
        v.detail = raw.detail;
        v.apps = app_names(model, raw.apps);
        v.trace.events = unwind(raw.trace);
        v.trace.verdict = "VIOLATION " + v.property + ": " + v.description;
        v.witness = raw.witness;
        ReplayResult rr = replay(model, props, v.trace, ec);
        if (!(rr.state == v.witness) ||
            std::find(rr.violated.begin(), rr.violated.end(), v.property) == rr.violated.end())
            throw DivergenceError("counterexample for '" + v.property + "' does not replay");
        v.trace.steps = std::move(rr.steps);
        result.violations.push_back(std::move(v));
    }
    std::sort(result.violations.begin(), result.violations.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.property, a.apps) < std::tie(b.property, b.apps);
    });
    result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

ReplayResult replay(const SystemModel& model, const std::vector<SafetyProperty>& props, const Trace& trace,
                    const ExplorationConfig& ec) {
    auto compiled = compile_properties(model, props);
    Runner runner(model, compiled, ec, true);
    ReplayResult out;
    out.state = model.initial_state();
    int state_no = 0;
    runner.set_sink(&out.steps, &state_no);
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const ExternalEvent& e = trace.events[i];
        const SystemState& s = out.state;
        auto bad = [&](const std::string& why) {
            return DivergenceError("event " + std::to_string(i + 1) + ": " + why);
        };
        switch (e.kind) {
        case ExternalEvent::Kind::Sensor:
            if (e.var < 0 || e.var >= static_cast<int>(model.vars().size()) || !model.vars()[e.var].sensed)
                throw bad("not a sensed attribute");
            if (e.value < 0 || e.value >= static_cast<int>(model.vars()[e.var].values.size()) ||
                e.value == s.physical[e.var])
                throw bad("value is not a change of " + model.var_name(e.var));
            break;
        case ExternalEvent::Kind::Mode:
            if (e.var != model.mode_var() || e.value < 0 ||
                e.value >= static_cast<int>(model.vars()[e.var].values.size()) || e.value == s.reported[e.var])
                throw bad("not a mode change");
            break;
        case ExternalEvent::Kind::Touch:
            if (e.app < 0 || e.app >= static_cast<int>(model.apps().size()) || model.touch_handlers(e.app).empty())
                throw bad("app cannot be touched");
            break;
        case ExternalEvent::Kind::Tick:
            if (s.timers.empty()) throw bad("no pending timers");
            break;
        }
        CascadeResult r = runner.run(out.state, e, e.choices);
        // Outcomes left unrecorded at the end of an event mean delivery.
        bool match = r.choices.size() >= e.choices.size() &&
                     std::equal(e.choices.begin(), e.choices.end(), r.choices.begin()) &&
                     std::all_of(r.choices.begin() + static_cast<long>(e.choices.size()), r.choices.end(),
                                 [](std::uint8_t c) { return c == kDelivered; });
        if (!match) throw bad("failure outcomes do not match the cascade");
        if (r.violated) {
            if (i + 1 != trace.events.size()) throw bad("violation before the end of the trace");
            for (const auto& f : r.found)
                out.violated.push_back(f.prop < 0 ? kEventLoopId : compiled[f.prop].property->id());
        }
    }
    if (!trace.steps.empty()) {
        std::size_t n = std::max(trace.steps.size(), out.steps.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= trace.steps.size() || i >= out.steps.size() || !(trace.steps[i] == out.steps[i]))
                throw DivergenceError("replay diverges at step " + std::to_string(i + 1) + ": recorded '" +
                                      (i < trace.steps.size() ? trace.steps[i].line() : std::string("<end>")) +
                                      "', replayed '" +
                                      (i < out.steps.size() ? out.steps[i].line() : std::string("<end>")) + "'");
        }
    }
    return out;
}

} // namespace homesafe
