#include "oracle.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <stdexcept>

namespace oracle {

using namespace homesafe;

namespace {

std::size_t g_interleavings = 0;

using Values = std::map<std::string, std::string>; // "device.attr" or "location.mode" -> value

const std::string kModeKey = "location.mode";

std::optional<long> as_number(const std::string& s) {
    long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool compare(CmpOp op, const std::string& a, const std::string& b) {
    auto x = as_number(a), y = as_number(b);
    int c = (x && y) ? (*x < *y ? -1 : *x > *y ? 1 : 0) : a.compare(b);
    switch (op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Ge: return c >= 0;
    }
    return false;
}

struct Sub {
    int inst;
    const HandlerSpec* handler;
    std::string key;
    std::optional<std::string> value;
};

struct Thread {
    int inst;
    std::vector<const Statement*> todo; // next statement at the back
};

struct Command {
    std::string key;
    std::string value;
};

class Oracle {
public:
    Oracle(const SystemConfig& c, const std::vector<SafetyProperty>& props) : c_(c), props_(props) {
        for (const auto& d : c.devices) {
            const Capability& cap = c.catalog->get(d.capability);
            for (const auto& a : cap.attributes) {
                std::string key = d.id + "." + a.name;
                auto dom = c.domain_of(d.capability, a);
                auto it = d.initial.find(a.name);
                init_[key] = it != d.initial.end() ? it->second : dom.front();
                if (a.access == AttrAccess::Sensed) {
                    if (a.gate) throw std::runtime_error("oracle: gated reports are not modelled");
                    sensed_.push_back({key, dom});
                }
            }
        }
        init_[kModeKey] = c.initial_mode;
        for (std::size_t i = 0; i < c.apps.size(); ++i) {
            const AppSpec& spec = c.spec_of(c.apps[i]);
            for (const auto& h : spec.handlers) {
                switch (h.trigger.kind) {
                case Trigger::Kind::Touch: touch_[static_cast<int>(i)].push_back(&h); break;
                case Trigger::Kind::Subscription:
                    for (const auto& key : keys(static_cast<int>(i), h.trigger.slot, h.trigger.attribute)) {
                        std::optional<std::string> v;
                        if (h.trigger.value) v = literal(static_cast<int>(i), *h.trigger.value);
                        subs_.push_back({static_cast<int>(i), &h, key, v});
                    }
                    break;
                default: throw std::runtime_error("oracle: timers are not modelled");
                }
            }
        }
    }

    std::set<std::string> run(int events) {
        g_interleavings = 0;
        search(init_, events);
        return found_;
    }

private:
    std::vector<std::string> keys(int inst, const std::string& slot, const std::string& attr) const {
        if (slot == "location") return {kModeKey};
        std::vector<std::string> out;
        auto it = c_.apps[inst].bindings.find(slot);
        if (it == c_.apps[inst].bindings.end()) throw std::runtime_error("oracle: unbound slot " + slot);
        for (const auto& d : it->second) out.push_back(d + "." + attr);
        return out;
    }

    std::string literal(int inst, const std::string& text) const {
        const AppSpec& spec = c_.spec_of(c_.apps[inst]);
        if (spec.find_param(text)) return c_.apps[inst].params.at(text);
        return text;
    }

    // Values of an operand. `inst` < 0 evaluates a property, where device
    // references name role tags.
    std::vector<std::string> operand(const Operand& o, const Values& v, int inst, const SafetyProperty* p) const {
        switch (o.kind) {
        case Operand::Kind::Mode: return {v.at(kModeKey)};
        case Operand::Kind::Number: return {o.text};
        case Operand::Kind::Name: return {inst >= 0 ? literal(inst, o.text) : o.text};
        case Operand::Kind::Clock: throw std::runtime_error("oracle: clock is not modelled");
        case Operand::Kind::DeviceAttr: {
            std::vector<std::string> out;
            if (inst >= 0) {
                for (const auto& k : keys(inst, o.ref, o.attribute)) out.push_back(v.at(k));
            } else {
                for (const auto& d : p->bindings.at(o.ref)) out.push_back(v.at(d + "." + o.attribute));
            }
            return out;
        }
        }
        return {};
    }

    // Every value on the left must compare true with every value on the right.
    bool eval(const Expr& e, const Values& v, int inst, const SafetyProperty* p) const {
        switch (e.kind) {
        case Expr::Kind::And:
            for (const auto& a : e.args)
                if (!eval(a, v, inst, p)) return false;
            return true;
        case Expr::Kind::Or:
            for (const auto& a : e.args)
                if (eval(a, v, inst, p)) return true;
            return false;
        case Expr::Kind::Not: return !eval(e.args.front(), v, inst, p);
        case Expr::Kind::Compare: break;
        }
        for (const auto& a : operand(e.lhs, v, inst, p))
            for (const auto& b : operand(e.rhs, v, inst, p))
                if (!compare(e.op, a, b)) return false;
        return true;
    }

    std::vector<char> truth(const Values& v) const {
        std::vector<char> t(props_.size());
        for (std::size_t i = 0; i < props_.size(); ++i)
            if (props_[i].kind() == PropertyKind::Invariant) t[i] = eval(props_[i].def.predicate, v, -1, &props_[i]);
        return t;
    }

    void notify(const std::string& key, const std::string& value, std::vector<Thread>& threads) const {
        for (const auto& s : subs_)
            if (s.key == key && (!s.value || *s.value == value)) threads.push_back(start(s.inst, *s.handler));
    }

    static Thread start(int inst, const HandlerSpec& h) {
        Thread t{inst, {}};
        for (auto it = h.body.rbegin(); it != h.body.rend(); ++it) t.todo.push_back(&*it);
        return t;
    }

    // Runs one command, recording violations; returns true when one occurred.
    bool command(Values& v, std::vector<Command>& log, std::vector<Thread>& threads, const std::string& key,
                 const std::string& value) {
        bool bad = false;
        for (std::size_t i = 0; i < props_.size(); ++i) {
            PropertyKind k = props_[i].kind();
            if (k != PropertyKind::ConflictFree && k != PropertyKind::RepeatFree) continue;
            for (const auto& prev : log) {
                if (prev.key != key) continue;
                if ((prev.value != value) == (k == PropertyKind::ConflictFree)) {
                    found_.insert(props_[i].id());
                    bad = true;
                }
            }
        }
        log.push_back({key, value});
        if (v.at(key) == value) return bad;
        std::vector<char> before = truth(v);
        v[key] = value;
        std::vector<char> after = truth(v);
        for (std::size_t i = 0; i < props_.size(); ++i) {
            if (props_[i].kind() == PropertyKind::Invariant && before[i] && !after[i]) {
                found_.insert(props_[i].id());
                bad = true;
            }
        }
        notify(key, value, threads);
        return bad;
    }

    void interleave(const Values& v, const std::vector<Thread>& threads, const std::vector<Command>& log,
                    bool bad, std::vector<std::pair<Values, bool>>& ends, int budget) {
        if (threads.empty()) {
            ++g_interleavings;
            ends.push_back({v, bad});
            return;
        }
        if (budget == 0) throw std::runtime_error("oracle: cascade does not terminate");
        for (std::size_t i = 0; i < threads.size(); ++i) {
            Values nv = v;
            std::vector<Thread> nt = threads;
            std::vector<Command> nl = log;
            bool nb = bad;
            Thread& t = nt[i];
            const Statement* st = t.todo.back();
            t.todo.pop_back();
            int inst = t.inst;
            std::vector<Thread> spawned;
            switch (st->kind) {
            case Statement::Kind::If:
                if (eval(st->condition, nv, inst, nullptr))
                    for (auto it = st->body.rbegin(); it != st->body.rend(); ++it) t.todo.push_back(&*it);
                break;
            case Statement::Kind::Block:
                for (auto it = st->body.rbegin(); it != st->body.rend(); ++it) t.todo.push_back(&*it);
                break;
            case Statement::Kind::Command: {
                std::string value = st->value.param ? c_.apps[inst].params.at(st->value.text) : st->value.text;
                for (const auto& key : keys(inst, st->slot, st->attribute))
                    nb |= command(nv, nl, spawned, key, value);
                break;
            }
            default: throw std::runtime_error("oracle: statement kind not modelled");
            }
            if (nt[i].todo.empty()) nt.erase(nt.begin() + static_cast<long>(i));
            nt.insert(nt.end(), spawned.begin(), spawned.end());
            interleave(nv, nt, nl, nb, ends, budget - 1);
        }
    }

    void search(const Values& v, int left) {
        if (left == 0) return;
        std::vector<std::pair<Values, std::vector<Thread>>> starts;
        for (const auto& [key, dom] : sensed_) {
            for (const auto& x : dom) {
                if (x == v.at(key)) continue;
                Values nv = v;
                nv[key] = x;
                std::vector<Thread> th;
                notify(key, x, th);
                starts.push_back({nv, th});
            }
        }
        for (const auto& m : c_.modes) {
            if (m == v.at(kModeKey)) continue;
            Values nv = v;
            nv[kModeKey] = m;
            std::vector<Thread> th;
            notify(kModeKey, m, th);
            starts.push_back({nv, th});
        }
        for (const auto& [inst, hs] : touch_) {
            std::vector<Thread> th;
            for (const auto* h : hs) th.push_back(start(inst, *h));
            starts.push_back({v, th});
        }
        for (const auto& [nv, th] : starts) {
            std::vector<std::pair<Values, bool>> ends;
            interleave(nv, th, {}, false, ends, 256);
            for (const auto& [end, bad] : ends)
                if (!bad) search(end, left - 1);
        }
    }

    const SystemConfig& c_;
    const std::vector<SafetyProperty>& props_;
    Values init_;
    std::vector<std::pair<std::string, std::vector<std::string>>> sensed_;
    std::vector<Sub> subs_;
    std::map<int, std::vector<const HandlerSpec*>> touch_;
    std::set<std::string> found_;
};

} // namespace

std::set<std::string> violated_properties(const SystemConfig& config, const std::vector<SafetyProperty>& props,
                                          int events) {
    return Oracle(config, props).run(events);
}

std::size_t last_interleavings() { return g_interleavings; }

} // namespace oracle
