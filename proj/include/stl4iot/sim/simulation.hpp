#pragma once

// Deterministic driver for a home machine tree: merges the sensor trace,
// engine timers, scripted commands and telemetry ticks into one virtual
// timeline. Single-threaded; the owner is the only caller.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stl4iot/sc/engine.hpp"
#include "stl4iot/sim/commands.hpp"
#include "stl4iot/sim/report.hpp"
#include "stl4iot/sim/telemetry.hpp"
#include "stl4iot/sim/trace.hpp"

namespace stl4iot::sim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimOptions {
  std::int64_t sample_period_ms = 1000;
};

class Simulation {
 public:
  Simulation(std::shared_ptr<const sc::CompiledChart> home, SensorTrace trace, std::vector<ScheduledCommand> script = {},
             SimOptions opt = {})
      : root_(std::move(home)), trace_(std::move(trace)), script_(std::move(script)), opt_(opt) {
    if (opt_.sample_period_ms <= 0) throw SimulationError("sample period must be positive");
    if (!std::is_sorted(trace_.entries.begin(), trace_.entries.end(),
                        [](const TraceEntry& a, const TraceEntry& b) { return a.t_ms < b.t_ms; }))
      throw SimulationError("trace entries out of time order");
    if (!std::is_sorted(script_.begin(), script_.end(),
                        [](const ScheduledCommand& a, const ScheduledCommand& b) { return a.t_ms < b.t_ms; }))
      throw SimulationError("command script out of time order");
  }

  /// Enters the home at t = 0 and processes that instant.
  void start() {
    if (started_) throw SimulationError("simulation already started");
    started_ = true;
    const auto n = report_.size();
    guarded([&] { append_step(report_, root_.enter()); });
    catalog_ = sim::catalog(root_);
    process_instant(0, {}, report_.size() != n);
  }

  bool started() const { return started_; }
  std::int64_t now() const { return root_.now(); }

  /// Earliest virtual instant with pending work (there is always a telemetry tick).
  std::int64_t next_instant() const {
    std::int64_t t = (now() / opt_.sample_period_ms + 1) * opt_.sample_period_ms;
    if (auto d = root_.next_due()) t = std::min(t, *d);
    if (trace_pos_ < trace_.entries.size()) t = std::min(t, std::max(now() + 1, trace_.entries[trace_pos_].t_ms));
    if (script_pos_ < script_.size()) t = std::min(t, std::max(now() + 1, script_[script_pos_].t_ms));
    return t;
  }

  /// Processes instant `t` (now < t <= next_instant()). `at_boundary` runs
  /// after timers, trace signals and scripted commands of `t`, before sampling.
  void step_to(std::int64_t t, const std::function<void()>& at_boundary = {}) {
    require_started();
    if (t <= now()) throw SimulationError("step_to must move forward (t=" + std::to_string(t) + ")");
    if (t > next_instant()) throw SimulationError("step_to would skip pending work before t=" + std::to_string(t));
    const auto n = report_.size();
    guarded([&] { append_step(report_, root_.advance_time(t - now())); });
    process_instant(t, at_boundary, report_.size() != n);
  }

  void run_until(std::int64_t t_end) {
    require_started();
    for (std::int64_t t = next_instant(); t <= t_end; t = next_instant()) step_to(t);
    if (t_end > now()) guarded([&] { append_step(report_, root_.advance_time(t_end - now())); });
  }

  /// Applies `cmd` at the current macro-step boundary.
  CommandResult apply(const Command& cmd) {
    require_started();
    CommandResult r;
    r.command = cmd;
    r.t_ms = now();
    std::string id;
    guarded([&] { id = execute(cmd, r); });
    r.seq = ++seq_;
    applied_.push_back({r.t_ms, cmd});
    std::string detail = to_string(cmd.kind);
    if (!cmd.args.empty()) detail += " " + cmd.args.dump();
    detail += r.accepted ? " accepted" : " rejected (" + r.reason + ")";
    report_.push_back({r.t_ms, id, ReportKind::Command, detail});
    dirty_ = true;
    return r;
  }

  TelemetrySample snapshot() const {
    require_started();
    return take_sample(root_, catalog_);
  }

  const ReportLog& report() const { return report_; }
  const std::vector<TelemetrySample>& samples() const { return samples_; }
  const std::vector<CatalogEntry>& catalog() const { return catalog_; }
  const std::vector<ScheduledCommand>& applied() const { return applied_; }
  const sc::MachineInstance& home() const { return root_; }
  const SensorTrace& trace() const { return trace_; }
  Speed speed() const { return speed_; }

  /// Called with every sample as it is taken.
  std::function<void(const TelemetrySample&)> on_sample;

 private:
  void require_started() const {
    if (!started_) throw CommandError(CommandErrorKind::SimulationNotRunning, "simulation not started");
  }

  template <class F>
  void guarded(F&& f) {
    try {
      f();
    } catch (const sc::EngineError& e) {
      throw SimulationError("t=" + std::to_string(now()) + ": " + e.what());
    }
  }

  void process_instant(std::int64_t t, const std::function<void()>& at_boundary, bool changed) {
    dirty_ = changed;
    const auto n = report_.size();
    while (trace_pos_ < trace_.entries.size() && trace_.entries[trace_pos_].t_ms <= t) {
      const auto& e = trace_.entries[trace_pos_++];
      if (!root_.find(e.system_id))
        throw SimulationError("t=" + std::to_string(t) + ": trace names unknown system '" + e.system_id + "'");
      guarded([&] { append_step(report_, root_.dispatch_to(e.system_id, {e.signal, e.value})); });
    }
    while (script_pos_ < script_.size() && script_[script_pos_].t_ms <= t) apply(script_[script_pos_++].command);
    if (at_boundary) at_boundary();
    if (report_.size() != n) dirty_ = true;
    if (dirty_ || t % opt_.sample_period_ms == 0) {
      samples_.push_back(take_sample(root_, catalog_));
      if (on_sample) on_sample(samples_.back());
    }
  }

  // ---- command semantics ----------------------------------------------------

  const CatalogEntry* entry(const std::string& id) const {
    for (const auto& e : catalog_)
      if (e.id == id) return &e;
    return nullptr;
  }

  const sc::MachineInstance& machine(const std::string& id) const {
    const auto* m = id == "hub" || id.empty() ? &root_ : root_.find(id);
    if (!m || !entry(id.empty() ? "hub" : id)) throw CommandError(CommandErrorKind::UnknownTarget, "unknown target '" + id + "'");
    return *m;
  }

  // Lockdown of any hub managing `id` (or of `id` itself when it is a hub).
  bool locked(const std::string& id) const {
    for (std::string p = id == "hub" ? "" : id;; p = parent_path(p)) {
      const auto* m = p.empty() ? &root_ : root_.find(p);
      if (m && m->has_var("lockdown") && m->read_var("lockdown").as_bool()) return true;
      if (p.empty()) return false;
    }
  }

  // Default target: the first system whose base unit accepts `event`.
  std::string resolve(const Command& cmd, const char* event) const {
    if (!cmd.target.empty()) return cmd.target;
    for (const auto& e : catalog_)
      if (!e.is_hub && root_.find(e.id)->child("base")->chart().find_event(event) >= 0) return e.id;
    throw CommandError(CommandErrorKind::UnknownTarget, std::string("no system accepts ") + event);
  }

  const sc::MachineInstance& system(const std::string& id, const char* event) const {
    const auto& m = machine(id);
    if (entry(id)->is_hub) throw CommandError(CommandErrorKind::BadRequest, "'" + id + "' is a hub, not a system");
    if (m.chart().find_event(event) < 0)
      throw CommandError(CommandErrorKind::BadRequest, "'" + id + "' does not support " + event);
    return m;
  }

  std::int64_t int_arg(const Command& c, const char* name) const {
    if (!c.args.contains(name) || !c.args[name].is_number_integer())
      throw CommandError(CommandErrorKind::BadRequest, std::string(to_string(c.kind)) + " needs integer args." + name);
    return c.args[name].get<std::int64_t>();
  }

  static void reject(CommandResult& r, std::string why) {
    r.accepted = false;
    r.reason = std::move(why);
  }

  Json status_of(const std::string& id) const {
    const auto& m = machine(id);
    if (entry(id.empty() ? "hub" : id)->is_hub)
      return {{"id", id.empty() ? "hub" : id}, {"on", m.read_var("on").as_bool()}, {"lockdown", m.read_var("lockdown").as_bool()}};
    return {{"id", id},
            {"status", m.read_var("on").as_bool() ? "on" : "off"},
            {"online", m.read_var("online").as_bool()},
            {"state", state_summary(*m.child("base"))}};
  }

  void send(const std::string& id, const std::string& event, sc::Value payload = {}) {
    append_step(report_, root_.dispatch_to(id == "hub" ? "" : id, {event, std::move(payload)}));
  }

  // Dispatches a device command, rejecting it under lockdown or while off.
  bool device(CommandResult& r, const std::string& id, const sc::MachineInstance& m) {
    if (locked(id)) reject(r, "emergency-lockdown");
    else if (!m.read_var("on").as_bool()) reject(r, "system-off");
    else return true;
    return false;
  }

  // Returns the id of the system or hub the command resolved to.
  std::string execute(const Command& cmd, CommandResult& r) {
    r.accepted = true;
    std::string id = cmd.target;
    switch (cmd.kind) {
      case CommandKind::ToggleSystem: {
        const auto& m = machine(id);
        const auto* e = entry(id);
        if (id == "hub" || !e->hub_toggleable) reject(r, "not-hub-toggleable");
        else if (locked(e->parent.empty() ? "hub" : e->parent)) reject(r, "emergency-lockdown");
        else if (m.read_var("on").as_bool() && !m.read_var("online").as_bool()) reject(r, "system-offline");
        else send(e->parent.empty() ? "hub" : e->parent, "toggle_" + last_segment(id));
        break;
      }
      case CommandKind::HubAllOn:
      case CommandKind::HubAllOff: {
        if (id.empty()) id = "hub";
        if (!entry(id) || !entry(id)->is_hub) {
          machine(id);
          throw CommandError(CommandErrorKind::BadRequest, "'" + id + "' is not a hub");
        }
        const bool on = cmd.kind == CommandKind::HubAllOn;
        if (on && locked(id)) reject(r, "emergency-lockdown");
        else send(id, on ? "HUBAllSystemsON" : "HUBAllSystemsOFF");
        break;
      }
      case CommandKind::TvChannel: {
        id = resolve(cmd, "set_channel");
        const auto& m = system(id, "set_channel");
        const auto& base = *m.child("base");
        if (cmd.args.contains("channel")) {
          const auto ch = int_arg(cmd, "channel");
          if (ch < 1 || ch > base.read_var("channels").as_int()) reject(r, "invalid-channel");
          else if (device(r, id, m)) send(id, "set_channel", sc::Value(ch));
        } else {
          const auto step = cmd.args.value("step", std::string());
          if (step != "up" && step != "down")
            throw CommandError(CommandErrorKind::BadRequest, "tv_channel needs args.channel or args.step up|down");
          if (device(r, id, m)) send(id, step == "up" ? "channel_up" : "channel_down");
        }
        break;
      }
      case CommandKind::TvInput: {
        id = resolve(cmd, "set_input");
        const auto& m = system(id, "set_input");
        const auto in = int_arg(cmd, "input");
        if (in < 0 || in >= m.child("base")->read_var("inputs").as_int()) reject(r, "invalid-input");
        else if (device(r, id, m)) send(id, "set_input", sc::Value(in));
        break;
      }
      case CommandKind::TvPromptResponse: {
        id = resolve(cmd, "prompt_response");
        const auto& m = system(id, "prompt_response");
        if (!device(r, id, m)) break;
        if (!m.child("base")->read_var("prompting").as_bool()) reject(r, "no-prompt");
        else send(id, "prompt_response");
        break;
      }
      case CommandKind::MwDoor: {
        id = resolve(cmd, "door");
        system(id, "door");
        if (!cmd.args.contains("open") || !cmd.args["open"].is_boolean())
          throw CommandError(CommandErrorKind::BadRequest, "mw_door needs boolean args.open");
        send(id, "door", sc::Value(cmd.args["open"].get<bool>()));
        break;
      }
      case CommandKind::MwStart:
      case CommandKind::MwAddTime: {
        const bool start = cmd.kind == CommandKind::MwStart;
        const char* ev = start ? "start" : "add_time";
        id = resolve(cmd, ev);
        const auto& m = system(id, ev);
        const auto ms = int_arg(cmd, start ? "duration_ms" : "ms");
        if (ms <= 0) {
          reject(r, "invalid-duration");
          break;
        }
        if (!device(r, id, m)) break;
        auto rep = root_.dispatch_to(id, {ev, sc::Value(ms)});
        append_step(report_, rep);
        for (const auto& e : rep.emitted)
          if (e.event == "start_rejected") {
            std::string why = e.payload.as_string();
            std::replace(why.begin(), why.end(), ' ', '-');
            reject(r, why);
          }
        const std::string base = id + "/base";
        if (r.accepted && std::none_of(rep.fired.begin(), rep.fired.end(),
                                       [&](const sc::FiredTransition& f) { return f.machine == base; }))
          reject(r, start ? "not-ready" : "not-cooking");
        break;
      }
      case CommandKind::LightsDim:
      case CommandKind::LightsBrighten: {
        const char* ev = cmd.kind == CommandKind::LightsDim ? "dim" : "brighten";
        id = resolve(cmd, ev);
        const auto& m = system(id, ev);
        if (device(r, id, m)) send(id, ev);
        break;
      }
      case CommandKind::TriggerSensor: {
        const auto& m = machine(id);
        if (entry(id)->is_hub) throw CommandError(CommandErrorKind::BadRequest, "cannot trigger a sensor on a hub");
        const auto signal = cmd.args.value("signal", std::string());
        const int ei = m.chart().find_event(signal);
        if (ei < 0) throw CommandError(CommandErrorKind::BadRequest, "'" + id + "' has no signal '" + signal + "'");
        const auto& decl = m.chart().events[static_cast<std::size_t>(ei)];
        if (!cmd.args.contains("value")) throw CommandError(CommandErrorKind::BadRequest, "trigger_sensor needs args.value");
        const auto& v = cmd.args["value"];
        sc::Value value;
        if (decl.payload == sc::ValueType::Bool && v.is_boolean()) value = sc::Value(v.get<bool>());
        else if (decl.payload == sc::ValueType::Real && v.is_number()) value = sc::Value(v.get<double>());
        else throw CommandError(CommandErrorKind::BadRequest, "args.value does not match signal '" + signal + "'");
        send(id, signal, std::move(value));
        break;
      }
      case CommandKind::ClearAlarm: {
        id = resolve(cmd, "clear_alarm");
        const auto& m = system(id, "clear_alarm");
        if (!m.child("base")->read_var("alarm").as_bool()) reject(r, "no-alarm");
        else send(id, "clear_alarm");
        break;
      }
      case CommandKind::SetSpeed: {
        const auto& s = cmd.args.contains("speed") ? cmd.args["speed"] : Json();
        if (s.is_string() && s.get<std::string>() == "max") speed_ = {true, 1.0};
        else if (s.is_number() && s.get<double>() > 0) speed_ = {false, s.get<double>()};
        else throw CommandError(CommandErrorKind::BadRequest, "set_speed needs args.speed > 0 or \"max\"");
        r.status = {{"speed", speed_.max ? Json("max") : Json(speed_.factor)}};
        return "hub";
      }
    }
    if (id.empty()) id = "hub";
    r.status = status_of(id);
    return id;
  }

  sc::MachineInstance root_;
  SensorTrace trace_;
  std::vector<ScheduledCommand> script_;
  SimOptions opt_;
  bool started_ = false;
  bool dirty_ = false;
  std::size_t trace_pos_ = 0;
  std::size_t script_pos_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<CatalogEntry> catalog_;
  ReportLog report_;
  std::vector<TelemetrySample> samples_;
  std::vector<ScheduledCommand> applied_;
  Speed speed_;
};

inline std::string format_telemetry(const std::vector<TelemetrySample>& samples) {
  std::string out;
  for (const auto& s : samples) out += to_json(s).dump() + "\n";
  return out;
}

}  // namespace stl4iot::sim
