#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "homesafe/config.hpp"
#include "homesafe/expr.hpp"

namespace homesafe {

// One (device, attribute) pair of the deployed system.
struct VarInfo {
    int device = 0;
    std::string attribute;
    bool sensed = false; // driven by the environment; keeps a separate physical value
    bool numeric = false;
    std::vector<std::string> values;
    std::vector<long> numbers; // parallel to values when numeric
    // Reports are suppressed while gate_var holds gate_value.
    int gate_var = -1;
    int gate_value = -1;

    int index_of(std::string_view value) const; // -1 when absent
};

struct DeviceInfo {
    std::string id;
    const Capability* capability = nullptr;
    std::vector<std::string> roles;
    bool failure_candidate = false;
    std::vector<int> vars; // by attribute name
};

struct CompiledOperand {
    enum class Kind { Vars, Clock, Const };
    Kind kind = Kind::Const;
    std::vector<int> vars; // several when a slot or role covers several devices
    std::string text;
    long number = 0;
    bool numeric = false;
};

struct CompiledExpr {
    Expr::Kind kind = Expr::Kind::Compare;
    CmpOp op = CmpOp::Eq;
    CompiledOperand lhs;
    CompiledOperand rhs;
    std::vector<CompiledExpr> args;
};

struct CompiledStmt {
    Statement::Kind kind = Statement::Kind::Block;
    CompiledExpr condition;
    std::vector<CompiledStmt> body;
    std::vector<int> reads;        // If: vars the condition reads
    std::vector<int> targets;      // Command / Raise vars
    std::vector<int> target_values; // value index per target
    std::string value;             // value text, recipient, endpoint
    int handler = -1;              // Unsubscribe / RunIn
    long delay = 0;
    std::string source;            // statement text for traces
};

struct HandlerInfo {
    int app = 0;
    std::string name;
    Trigger::Kind trigger = Trigger::Kind::Subscription;
    long period = 0;
    std::vector<CompiledStmt> body;
};

struct AppRuntime {
    std::string id;
    const AppSpec* spec = nullptr;
    std::vector<int> handlers;
};

struct Subscription {
    int handler = 0;
    int value = -1; // -1: any value
};

struct Timer {
    std::uint32_t due = 0;
    std::uint16_t handler = 0;
    std::uint64_t cause = 0; // apps whose actions scheduled it

    auto operator<=>(const Timer&) const = default;
};

// A full snapshot of the system during exploration.
struct SystemState {
    std::vector<std::uint8_t> reported; // per var, as seen by apps
    std::vector<std::uint8_t> physical; // per var, the environment
    std::vector<std::uint8_t> offline;  // per device
    std::uint32_t clock = 0;
    std::vector<Timer> timers;          // sorted
    std::vector<std::uint8_t> disabled; // per handler
    std::uint8_t failures = 0;
    // Per var, the apps whose actions led to its current reported value
    // (bit per app instance; 0 when set by the environment or the user).
    std::vector<std::uint64_t> cause;

    // Unique byte string per state: vars follow sorted device ids and sorted
    // attribute names.
    std::string canonical() const;
    bool operator==(const SystemState&) const = default;
};

struct Notification {
    int handler = 0;
    int var = -1; // -1 for touch and timer calls
    int value = -1;
    std::uint64_t cause = 0; // apps behind the change that triggered it
};

struct CommandRecord {
    int var = 0;
    int value = 0;
    int app = -1;
    bool delivered = true;
    int seq = 0;
    std::uint64_t cause = 0; // issuing app plus the apps it reacted to
};

// The deployed system compiled for one group of app instances. Devices are
// ordered by id, handlers by (app instance id, handler name), which is also
// the order subscribers are notified in.
class SystemModel {
public:
    SystemModel(const SystemConfig& config, const std::vector<std::string>& group);

    const SystemConfig& config() const { return *config_; }
    const std::vector<DeviceInfo>& devices() const { return devices_; }
    const std::vector<VarInfo>& vars() const { return vars_; }
    const std::vector<AppRuntime>& apps() const { return apps_; }
    const std::vector<HandlerInfo>& handlers() const { return handlers_; }

    int find_device(std::string_view id) const;
    int var_of(int device, std::string_view attribute) const; // -1 when absent
    int mode_var() const { return mode_var_; }
    int location_device() const { return location_device_; }

    std::string var_name(int var) const; // "device.attribute"
    const std::string& value_text(int var, int value) const { return vars_[var].values[value]; }
    std::string handler_label(int handler) const;

    // Handlers subscribed to this var and value, in notification order.
    std::vector<Notification> subscribers(int var, int value) const;
    std::vector<Notification> touch_handlers(int app) const;

    // Sensed vars the group's apps subscribe to or read, in var order.
    const std::vector<int>& app_input_vars() const { return app_inputs_; }
    bool mode_is_app_input() const { return mode_input_; }

    SystemState initial_state() const;

    // Role tags resolve to devices; app slots resolve through bindings.
    CompiledExpr compile_property(const Expr& e) const;
    bool eval(const CompiledExpr& e, const SystemState& s, bool physical) const;

private:
    CompiledExpr compile_app_expr(const Expr& e, const AppInstance& inst) const;
    CompiledStmt compile_stmt(const Statement& s, const AppInstance& inst, int app) const;
    std::vector<int> slot_vars(const AppInstance& inst, const std::string& slot, const std::string& attr) const;
    void collect_reads(const CompiledStmt& s, std::vector<bool>& read) const;

    const SystemConfig* config_;
    std::vector<DeviceInfo> devices_;
    std::vector<VarInfo> vars_;
    std::vector<AppRuntime> apps_;
    std::vector<HandlerInfo> handlers_;
    std::vector<std::vector<Subscription>> subs_; // per var
    std::vector<int> app_inputs_;
    bool mode_input_ = false;
    int mode_var_ = -1;
    int location_device_ = -1;
    std::vector<std::uint8_t> initial_;
};

// Applies an environment change to a sensor. The physical value always
// changes; the reported value and notifications only when the device is
// online, reporting is not gated and the value differs.
std::vector<Notification> sensor_state_update(const SystemModel& m, SystemState& s, int var, int value,
                                              bool online = true);

// Sends a command. It is logged even when it is lost or redundant; the state
// changes and subscribers are notified only when delivered to an online
// device and the value differs.
std::vector<Notification> actuator_state_update(const SystemModel& m, SystemState& s,
                                                std::vector<CommandRecord>& log, int var, int value,
                                                bool delivered = true, int app = -1, std::uint64_t cause = 0);

} // namespace homesafe
