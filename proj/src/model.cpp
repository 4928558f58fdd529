#include "homesafe/model.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "homesafe/error.hpp"

namespace homesafe {

int VarInfo::index_of(std::string_view value) const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] == value) return static_cast<int>(i);
    if (numeric) {
        long n = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
        if (ec == std::errc() && p == value.data() + value.size())
            for (std::size_t i = 0; i < numbers.size(); ++i)
                if (numbers[i] == n) return static_cast<int>(i);
    }
    return -1;
}

namespace {

bool parse_long(std::string_view text, long& out) {
    if (text.empty()) return false;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && p == text.data() + text.size();
}

CompiledOperand constant(const std::string& text) {
    CompiledOperand o;
    o.kind = CompiledOperand::Kind::Const;
    o.text = text;
    o.numeric = parse_long(text, o.number);
    return o;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void condition_vars(const CompiledExpr& e, std::vector<int>& out) {
    for (const auto* o : {&e.lhs, &e.rhs})
        if (o->kind == CompiledOperand::Kind::Vars) out.insert(out.end(), o->vars.begin(), o->vars.end());
    for (const auto& a : e.args) condition_vars(a, out);
}

void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

} // namespace

std::string SystemState::canonical() const {
    std::string out;
    out.reserve(reported.size() * 2 + offline.size() + disabled.size() + timers.size() * 6 + 24);
    put_u32(out, static_cast<std::uint32_t>(reported.size()));
    out.append(reported.begin(), reported.end());
    out.append(physical.begin(), physical.end());
    out.append(offline.begin(), offline.end());
    put_u32(out, clock);
    put_u32(out, static_cast<std::uint32_t>(timers.size()));
    for (const auto& t : timers) {
        put_u32(out, t.due);
        out.push_back(static_cast<char>(t.handler & 0xff));
        out.push_back(static_cast<char>(t.handler >> 8));
        put_u64(out, t.cause);
    }
    out.append(disabled.begin(), disabled.end());
    out.push_back(static_cast<char>(failures));
    for (auto c : cause) put_u64(out, c);
    return out;
}

SystemModel::SystemModel(const SystemConfig& config, const std::vector<std::string>& group)
    : config_(&config) {
    const Catalog& catalog = *config.catalog;
    bool any_candidate = std::any_of(config.devices.begin(), config.devices.end(),
                                     [](const DeviceDecl& d) { return d.offline_candidate; });

    std::vector<const DeviceDecl*> decls;
    for (const auto& d : config.devices) decls.push_back(&d);
    DeviceDecl location;
    location.id = std::string(kLocationSlot);
    location.capability = std::string(kLocationCapability);
    location.initial[std::string(kModeAttribute)] = config.initial_mode;
    decls.push_back(&location);
    std::sort(decls.begin(), decls.end(), [](auto a, auto b) { return a->id < b->id; });

    std::vector<std::map<std::string, std::string>> initial;
    for (const DeviceDecl* d : decls) {
        DeviceInfo dev;
        dev.id = d->id;
        dev.capability = &catalog.get(d->capability);
        dev.roles = d->roles;
        bool is_location = d == &location;
        dev.failure_candidate = !is_location && (!any_candidate || d->offline_candidate);
        std::vector<const AttributeSpec*> attrs;
        for (const auto& a : dev.capability->attributes) attrs.push_back(&a);
        std::sort(attrs.begin(), attrs.end(), [](auto a, auto b) { return a->name < b->name; });
        for (const AttributeSpec* a : attrs) {
            VarInfo v;
            v.device = static_cast<int>(devices_.size());
            v.attribute = a->name;
            v.sensed = a->access == AttrAccess::Sensed;
            v.numeric = a->numeric;
            v.values = config.domain_of(d->capability, *a);
            if (v.values.empty())
                throw ConfigError("device '" + d->id + "': attribute '" + a->name + "' has an empty domain");
            if (v.values.size() > 255)
                throw ConfigError("device '" + d->id + "': domain of '" + a->name + "' is too large");
            if (v.numeric) {
                for (const auto& text : v.values) {
                    long n = 0;
                    if (!parse_long(text, n))
                        throw ConfigError("attribute '" + a->name + "': '" + text + "' is not a number");
                    v.numbers.push_back(n);
                }
            }
            dev.vars.push_back(static_cast<int>(vars_.size()));
            vars_.push_back(std::move(v));
        }
        // Gates refer to attributes of the same device.
        for (const AttributeSpec* a : attrs) {
            if (!a->gate) continue;
            int var = -1, gate = -1;
            for (int g : dev.vars) {
                if (vars_[g].attribute == a->name) var = g;
                if (vars_[g].attribute == a->gate->attribute) gate = g;
            }
            vars_[var].gate_var = gate;
            vars_[var].gate_value = vars_[gate].index_of(a->gate->value);
        }
        if (is_location) {
            location_device_ = static_cast<int>(devices_.size());
            mode_var_ = dev.vars.front();
        }
        initial.push_back(d->initial);
        devices_.push_back(std::move(dev));
    }
    initial_.reserve(vars_.size());
    for (std::size_t v = 0; v < vars_.size(); ++v) {
        const auto& init = initial[vars_[v].device];
        auto it = init.find(vars_[v].attribute);
        int idx = it == init.end() ? 0 : vars_[v].index_of(it->second);
        if (idx < 0)
            throw ConfigError("device '" + devices_[vars_[v].device].id + "': initial value '" + it->second +
                              "' is outside the domain of '" + vars_[v].attribute + "'");
        initial_.push_back(static_cast<std::uint8_t>(idx));
    }

    // App instances of the group, ordered by instance id.
    std::vector<const AppInstance*> insts;
    for (const auto& id : group) {
        const AppInstance* inst = config.find_app(id);
        if (!inst) throw ConfigError("unknown app instance '" + id + "'");
        if (std::find(insts.begin(), insts.end(), inst) == insts.end()) insts.push_back(inst);
    }
    std::sort(insts.begin(), insts.end(), [](auto a, auto b) { return a->id < b->id; });
    if (insts.size() > 64) throw ConfigError("at most 64 app instances can be checked together");

    std::vector<std::vector<const HandlerSpec*>> specs;
    for (const AppInstance* inst : insts) {
        AppRuntime app;
        app.id = inst->id;
        app.spec = &config.spec_of(*inst);
        std::vector<const HandlerSpec*> hs;
        for (const auto& h : app.spec->handlers) hs.push_back(&h);
        std::sort(hs.begin(), hs.end(), [](auto a, auto b) { return a->name < b->name; });
        for (const HandlerSpec* h : hs) {
            app.handlers.push_back(static_cast<int>(handlers_.size()));
            HandlerInfo info;
            info.app = static_cast<int>(apps_.size());
            info.name = h->name;
            info.trigger = h->trigger.kind;
            info.period = h->trigger.period;
            handlers_.push_back(std::move(info));
        }
        specs.push_back(std::move(hs));
        apps_.push_back(std::move(app));
    }
    if (handlers_.size() > 65535) throw ConfigError("too many handlers");

    subs_.assign(vars_.size(), {});
    std::vector<bool> read(vars_.size(), false);
    for (std::size_t a = 0; a < apps_.size(); ++a) {
        const AppInstance& inst = *insts[a];
        for (std::size_t k = 0; k < specs[a].size(); ++k) {
            const HandlerSpec& h = *specs[a][k];
            int id = apps_[a].handlers[k];
            for (const auto& st : h.body)
                handlers_[id].body.push_back(compile_stmt(st, inst, static_cast<int>(a)));
            for (const auto& st : handlers_[id].body) collect_reads(st, read);
            if (h.trigger.kind != Trigger::Kind::Subscription) continue;
            for (int var : slot_vars(inst, h.trigger.slot, h.trigger.attribute)) {
                Subscription sub;
                sub.handler = id;
                if (h.trigger.value) {
                    sub.value = vars_[var].index_of(*h.trigger.value);
                    if (sub.value < 0)
                        throw ConfigError("app '" + inst.id + "', handler '" + h.name + "': value '" +
                                          *h.trigger.value + "' is outside the domain of " + var_name(var));
                }
                subs_[var].push_back(sub);
                read[var] = true;
            }
        }
    }
    for (std::size_t v = 0; v < vars_.size(); ++v) {
        if (!read[v]) continue;
        if (static_cast<int>(v) == mode_var_) mode_input_ = true;
        else if (vars_[v].sensed) app_inputs_.push_back(static_cast<int>(v));
    }
}

int SystemModel::find_device(std::string_view id) const {
    for (std::size_t i = 0; i < devices_.size(); ++i)
        if (devices_[i].id == id) return static_cast<int>(i);
    return -1;
}

int SystemModel::var_of(int device, std::string_view attribute) const {
    for (int v : devices_[device].vars)
        if (vars_[v].attribute == attribute) return v;
    return -1;
}

std::string SystemModel::var_name(int var) const {
    return devices_[vars_[var].device].id + "." + vars_[var].attribute;
}

std::string SystemModel::handler_label(int handler) const {
    return apps_[handlers_[handler].app].id + "." + handlers_[handler].name;
}

std::vector<Notification> SystemModel::subscribers(int var, int value) const {
    std::vector<Notification> out;
    for (const auto& s : subs_[var])
        if (s.value < 0 || s.value == value) out.push_back({s.handler, var, value});
    return out;
}

std::vector<Notification> SystemModel::touch_handlers(int app) const {
    std::vector<Notification> out;
    for (int h : apps_[app].handlers)
        if (handlers_[h].trigger == Trigger::Kind::Touch) out.push_back({h, -1, -1});
    return out;
}

SystemState SystemModel::initial_state() const {
    SystemState s;
    s.reported = initial_;
    s.physical = initial_;
    s.offline.assign(devices_.size(), 0);
    s.disabled.assign(handlers_.size(), 0);
    s.cause.assign(vars_.size(), 0);
    for (std::size_t h = 0; h < handlers_.size(); ++h)
        if (handlers_[h].trigger == Trigger::Kind::Schedule)
            s.timers.push_back({static_cast<std::uint32_t>(handlers_[h].period), static_cast<std::uint16_t>(h)});
    std::sort(s.timers.begin(), s.timers.end());
    return s;
}

std::vector<int> SystemModel::slot_vars(const AppInstance& inst, const std::string& slot,
                                        const std::string& attr) const {
    std::vector<int> out;
    if (slot == kLocationSlot) {
        out.push_back(mode_var_);
        return out;
    }
    auto it = inst.bindings.find(slot);
    if (it == inst.bindings.end()) throw ConfigError("app '" + inst.id + "': slot '" + slot + "' is not bound");
    for (const auto& dev : it->second) {
        int d = find_device(dev);
        int v = d < 0 ? -1 : var_of(d, attr);
        if (v < 0) throw ConfigError("app '" + inst.id + "': device '" + dev + "' has no attribute '" + attr + "'");
        out.push_back(v);
    }
    return out;
}

CompiledExpr SystemModel::compile_app_expr(const Expr& e, const AppInstance& inst) const {
    CompiledExpr c;
    c.kind = e.kind;
    c.op = e.op;
    for (const auto& a : e.args) c.args.push_back(compile_app_expr(a, inst));
    if (e.kind != Expr::Kind::Compare) return c;
    auto operand = [&](const Operand& o) {
        CompiledOperand r;
        switch (o.kind) {
        case Operand::Kind::DeviceAttr:
            r.kind = CompiledOperand::Kind::Vars;
            r.vars = slot_vars(inst, o.ref, o.attribute);
            break;
        case Operand::Kind::Mode:
            r.kind = CompiledOperand::Kind::Vars;
            r.vars = {mode_var_};
            break;
        case Operand::Kind::Clock: r.kind = CompiledOperand::Kind::Clock; break;
        case Operand::Kind::Name: {
            auto p = inst.params.find(o.text);
            r = constant(p == inst.params.end() ? o.text : p->second);
            break;
        }
        case Operand::Kind::Number: r = constant(o.text); break;
        }
        return r;
    };
    c.lhs = operand(e.lhs);
    c.rhs = operand(e.rhs);
    return c;
}

CompiledExpr SystemModel::compile_property(const Expr& e) const {
    CompiledExpr c;
    c.kind = e.kind;
    c.op = e.op;
    for (const auto& a : e.args) c.args.push_back(compile_property(a));
    if (e.kind != Expr::Kind::Compare) return c;
    auto operand = [&](const Operand& o) {
        CompiledOperand r;
        switch (o.kind) {
        case Operand::Kind::DeviceAttr: {
            r.kind = CompiledOperand::Kind::Vars;
            for (const auto& dev : devices_) {
                if (std::find(dev.roles.begin(), dev.roles.end(), o.ref) == dev.roles.end()) continue;
                int v = var_of(static_cast<int>(&dev - devices_.data()), o.attribute);
                if (v < 0)
                    throw ConfigError("device '" + dev.id + "' with role '" + o.ref + "' has no attribute '" +
                                      o.attribute + "'");
                r.vars.push_back(v);
            }
            if (r.vars.empty()) throw ConfigError("no device has role '" + o.ref + "'");
            break;
        }
        case Operand::Kind::Mode:
            r.kind = CompiledOperand::Kind::Vars;
            r.vars = {mode_var_};
            break;
        case Operand::Kind::Clock: r.kind = CompiledOperand::Kind::Clock; break;
        case Operand::Kind::Name:
        case Operand::Kind::Number: r = constant(o.text); break;
        }
        return r;
    };
    c.lhs = operand(e.lhs);
    c.rhs = operand(e.rhs);
    return c;
}

CompiledStmt SystemModel::compile_stmt(const Statement& s, const AppInstance& inst, int app) const {
    CompiledStmt c;
    c.kind = s.kind;
    auto value_of = [&](const ValueRef& v) {
        if (!v.param) return v.text;
        return inst.params.at(v.text);
    };
    auto handler_id = [&](const std::string& name) {
        for (int h : apps_[app].handlers)
            if (handlers_[h].name == name) return h;
        throw ConfigError("app '" + inst.id + "': unknown handler '" + name + "'");
    };
    switch (s.kind) {
    case Statement::Kind::If:
        c.condition = compile_app_expr(s.condition, inst);
        condition_vars(c.condition, c.reads);
        std::sort(c.reads.begin(), c.reads.end());
        c.reads.erase(std::unique(c.reads.begin(), c.reads.end()), c.reads.end());
        c.source = "if (" + render(s.condition) + ")";
        [[fallthrough]];
    case Statement::Kind::Block:
        for (const auto& b : s.body) c.body.push_back(compile_stmt(b, inst, app));
        break;
    case Statement::Kind::Command:
    case Statement::Kind::Raise: {
        c.value = value_of(s.value);
        c.targets = slot_vars(inst, s.slot, s.attribute);
        for (int v : c.targets) {
            int idx = vars_[v].index_of(c.value);
            if (idx < 0)
                throw ConfigError("app '" + inst.id + "': value '" + c.value + "' is outside the domain of " +
                                  var_name(v));
            c.target_values.push_back(idx);
        }
        c.source = s.kind == Statement::Kind::Command ? s.slot + ".set(" + s.attribute + ", " + c.value + ")"
                                                      : "raise(" + s.attribute + ", " + c.value + ")";
        break;
    }
    case Statement::Kind::Sms:
        c.value = value_of(s.value);
        c.source = "sms(\"" + c.value + "\")";
        break;
    case Statement::Kind::Post:
        c.value = s.endpoint;
        c.source = "post(\"" + c.value + "\")";
        break;
    case Statement::Kind::Unsubscribe:
        c.handler = handler_id(s.handler);
        c.source = "unsubscribe(" + s.handler + ")";
        break;
    case Statement::Kind::RunIn:
        c.handler = handler_id(s.handler);
        c.delay = s.delay;
        c.source = "runIn(" + std::to_string(s.delay) + ", " + s.handler + ")";
        break;
    }
    return c;
}

void SystemModel::collect_reads(const CompiledStmt& s, std::vector<bool>& read) const {
    std::vector<const CompiledExpr*> work;
    if (s.kind == Statement::Kind::If) work.push_back(&s.condition);
    while (!work.empty()) {
        const CompiledExpr* e = work.back();
        work.pop_back();
        for (const auto& a : e->args) work.push_back(&a);
        for (int v : e->lhs.vars) read[v] = true;
        for (int v : e->rhs.vars) read[v] = true;
    }
    for (const auto& b : s.body) collect_reads(b, read);
}

namespace {

struct Value {
    const std::string* text;
    long number;
    bool numeric;
};

bool compare(CmpOp op, const Value& a, const Value& b) {
    if (a.numeric && b.numeric) {
        switch (op) {
        case CmpOp::Eq: return a.number == b.number;
        case CmpOp::Ne: return a.number != b.number;
        case CmpOp::Lt: return a.number < b.number;
        case CmpOp::Le: return a.number <= b.number;
        case CmpOp::Gt: return a.number > b.number;
        case CmpOp::Ge: return a.number >= b.number;
        }
    }
    switch (op) {
    case CmpOp::Eq: return *a.text == *b.text;
    case CmpOp::Ne: return *a.text != *b.text;
    default: return false;
    }
}

} // namespace

bool SystemModel::eval(const CompiledExpr& e, const SystemState& s, bool physical) const {
    switch (e.kind) {
    case Expr::Kind::And:
        for (const auto& a : e.args)
            if (!eval(a, s, physical)) return false;
        return true;
    case Expr::Kind::Or:
        for (const auto& a : e.args)
            if (eval(a, s, physical)) return true;
        return false;
    case Expr::Kind::Not: return !eval(e.args.front(), s, physical);
    case Expr::Kind::Compare: break;
    }
    static const std::string empty;
    std::string clock_text;
    auto values = [&](const CompiledOperand& o, std::vector<Value>& out) {
        switch (o.kind) {
        case CompiledOperand::Kind::Const: out.push_back({&o.text, o.number, o.numeric}); break;
        case CompiledOperand::Kind::Clock: out.push_back({&empty, static_cast<long>(s.clock), true}); break;
        case CompiledOperand::Kind::Vars:
            for (int v : o.vars) {
                const VarInfo& info = vars_[v];
                int idx = (physical && info.sensed) ? s.physical[v] : s.reported[v];
                out.push_back({&info.values[idx], info.numeric ? info.numbers[idx] : 0, info.numeric});
            }
            break;
        }
    };
    std::vector<Value> lhs, rhs;
    values(e.lhs, lhs);
    values(e.rhs, rhs);
    // A slot or role covering several devices must satisfy the comparison
    // for every one of them.
    for (const auto& a : lhs)
        for (const auto& b : rhs)
            if (!compare(e.op, a, b)) return false;
    return true;
}

std::vector<Notification> sensor_state_update(const SystemModel& m, SystemState& s, int var, int value,
                                              bool online) {
    const VarInfo& info = m.vars().at(var);
    if (!info.sensed) throw ConfigError(m.var_name(var) + " is not a sensed attribute");
    if (value < 0 || value >= static_cast<int>(info.values.size()))
        throw ConfigError("value outside the domain of " + m.var_name(var));
    s.physical[var] = static_cast<std::uint8_t>(value);
    if (!online || s.offline[info.device]) return {};
    if (info.gate_var >= 0 && s.reported[info.gate_var] == info.gate_value) return {};
    if (s.reported[var] == value) return {};
    s.reported[var] = static_cast<std::uint8_t>(value);
    s.cause[var] = 0;
    return m.subscribers(var, value);
}

std::vector<Notification> actuator_state_update(const SystemModel& m, SystemState& s,
                                                std::vector<CommandRecord>& log, int var, int value,
                                                bool delivered, int app, std::uint64_t cause) {
    const VarInfo& info = m.vars().at(var);
    if (value < 0 || value >= static_cast<int>(info.values.size()))
        throw ConfigError("value outside the domain of " + m.var_name(var));
    bool arrives = delivered && !s.offline[info.device];
    log.push_back({var, value, app, arrives, static_cast<int>(log.size()), cause});
    if (!arrives || s.reported[var] == value) return {};
    s.reported[var] = static_cast<std::uint8_t>(value);
    s.physical[var] = static_cast<std::uint8_t>(value);
    s.cause[var] |= cause; // earlier app writers shaped the transition too
    auto notes = m.subscribers(var, value);
    for (auto& n : notes) n.cause = cause;
    return notes;
}

} // namespace homesafe
