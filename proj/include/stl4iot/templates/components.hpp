#pragma once

// Atomic IoT components. Each component is produced as a Fragment (one region
// plus the events, variables and transitions it needs) so the system and hub
// assemblers can place it anywhere; the build_* functions wrap a fragment
// into a standalone definition.

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stl4iot/sc/model.hpp"

namespace stl4iot::templates {

enum class TemplateErrorKind { InvalidParams, UnknownComponent, DuplicateSystemId, NoCandidate };

inline std::string_view to_string(TemplateErrorKind k) {
  switch (k) {
    case TemplateErrorKind::InvalidParams: return "InvalidParams";
    case TemplateErrorKind::UnknownComponent: return "UnknownComponent";
    case TemplateErrorKind::DuplicateSystemId: return "DuplicateSystemId";
    case TemplateErrorKind::NoCandidate: return "NoCandidate";
  }
  return "?";
}

class TemplateError : public std::runtime_error {
 public:
  TemplateError(TemplateErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  TemplateErrorKind kind() const { return kind_; }

 private:
  TemplateErrorKind kind_;
};

struct Fragment {
  sc::Region region;
  std::vector<sc::EventDecl> events;
  std::vector<sc::VariableDecl> variables;
  std::vector<sc::TransitionDef> transitions;
};

/// Declares the fragment's events and variables in `d` and appends its transitions.
/// The region itself is placed by the caller.
inline void merge_into(sc::StatechartDef& d, const Fragment& f) {
  for (const auto& e : f.events) sc::build::declare(d, e);
  for (const auto& v : f.variables) sc::build::declare(d, v);
  d.transitions.insert(d.transitions.end(), f.transitions.begin(), f.transitions.end());
}

/// How a component is switched. Equal event names mean one event toggles.
struct Switching {
  std::string on_event = "toggle";
  std::string off_event = "toggle";
  sc::EventDirection direction = sc::EventDirection::In;
  bool start_on = true;
};

inline Switching system_switching() { return {"system_on", "system_off", sc::EventDirection::Internal, false}; }

namespace detail {

inline std::string at(const std::string& path, const std::string& state) { return path + "/" + state; }

inline void switch_events(Fragment& f, const Switching& sw) {
  f.events.push_back({sw.on_event, sc::ValueType::None, sw.direction});
  if (sw.off_event != sw.on_event) f.events.push_back({sw.off_event, sc::ValueType::None, sw.direction});
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw TemplateError(TemplateErrorKind::InvalidParams, what);
}

}  // namespace detail

// ---- sensor ----------------------------------------------------------------

enum class SensorKind { Generic, Ultrasonic };

struct SensorParams {
  std::string name = "sensor";  // sub-region name when several sensors share a system
  std::string prefix;           // prepended to the sensor's variable names
  SensorKind kind = SensorKind::Generic;
  std::int64_t period_ms = 500;
  std::string input_event;  // empty: "sense" (generic) or "motion" (ultrasonic)
  sc::ValueType input_type = sc::ValueType::None;  // none: real (generic) or bool (ultrasonic)
  std::string activity_condition;                  // over `payload`; empty: "payload > 0.0" / "payload"
  std::int64_t simulated_activity_after_ms = 0;    // 0: no timed activity

  std::string input() const {
    if (!input_event.empty()) return input_event;
    return kind == SensorKind::Ultrasonic ? "motion" : "sense";
  }
  sc::ValueType type() const {
    if (input_type != sc::ValueType::None) return input_type;
    return kind == SensorKind::Ultrasonic ? sc::ValueType::Bool : sc::ValueType::Real;
  }
  std::string condition() const {
    if (!activity_condition.empty()) return activity_condition;
    return type() == sc::ValueType::Bool ? "payload" : "payload > 0.0";
  }
  std::string reading_var() const { return prefix + "reading"; }
  std::string activity_var() const { return prefix + "activity"; }
  std::string level_var() const { return prefix + "level"; }
  std::string reading_event() const { return prefix + "SensorReading"; }
};

/// Sensor region at `path`: Off and SensorMonitoring{Activity, Sampling}.
inline Fragment sensor_fragment(const SensorParams& p, const std::string& region_name, const std::string& path,
                                const Switching& sw) {
  using namespace sc::build;
  using detail::at;
  detail::require(p.period_ms > 0, "sensor period_ms must be positive");
  detail::require(p.simulated_activity_after_ms >= 0, "sensor counter must not be negative");
  detail::require(p.type() == sc::ValueType::Bool || p.type() == sc::ValueType::Real, "sensor input must be bool or real");

  Fragment f;
  const std::string act = p.activity_var(), rd = p.reading_var(), lvl = p.level_var();
  const std::string mon = at(path, "SensorMonitoring");
  f.region = region(region_name, {
      basic("Off", !sw.start_on, {rd + " := false", act + " := false"}),
      orthogonal("SensorMonitoring",
                 {region("Activity", {basic("NoActivitySensed", true), basic("ActivitySensed")}),
                  region("Sampling", {basic("Sampling", true)})},
                 sw.start_on, {rd + " := true"}),
  });
  detail::switch_events(f, sw);
  f.events.push_back(in(p.input(), p.type()));
  f.events.push_back(internal("SensorsTriggered", sc::ValueType::Bool));
  f.events.push_back(internal(p.reading_event(), sc::ValueType::Bool));
  f.variables = {var(rd, sc::ValueType::Bool), var(act, sc::ValueType::Bool), var(lvl, sc::ValueType::Real)};

  const std::string off = at(path, "Off");
  const std::string no = at(mon, "Activity/NoActivitySensed"), yes = at(mon, "Activity/ActivitySensed");
  const std::string sampling = at(mon, "Sampling/Sampling");
  const bool real = p.type() == sc::ValueType::Real;
  std::vector<std::string> update{act + " := " + p.condition()};
  if (real) update.insert(update.begin(), lvl + " := payload");
  auto& t = f.transitions;
  t.push_back(tr(off, mon, on(sw.on_event)));
  t.push_back(tr(mon, off, on(sw.off_event)));
  if (real) t.push_back(local(off, on(p.input()), "", {lvl + " := payload"}));
  t.push_back(local(sampling, on(p.input()), "", update));
  t.push_back(tr(no, yes, always(), act, {"raise SensorsTriggered(true)"}));
  t.push_back(tr(yes, no, always(), "!" + act, {"raise SensorsTriggered(false)"}));
  t.push_back(local(yes, on(p.input()), p.condition(), {"raise SensorsTriggered(true)"}));
  t.push_back(tr(sampling, sampling, after(p.period_ms), "", {"raise " + p.reading_event() + "(" + act + ")"}));
  if (p.simulated_activity_after_ms > 0)
    t.push_back(tr(no, yes, after(p.simulated_activity_after_ms), "", {act + " := true", "raise SensorsTriggered(true)"}));
  return f;
}

inline sc::StatechartDef build_sensor(const SensorParams& p = {}) {
  sc::StatechartDef d;
  d.name = p.kind == SensorKind::Ultrasonic ? "UltrasonicSensor" : "GenericSensor";
  Fragment f = sensor_fragment(p, "Sensor", "Sensor", Switching{});
  merge_into(d, f);
  d.root.push_back(f.region);
  return d;
}

// ---- controller ------------------------------------------------------------

struct ControllerParams {
  std::string decision = "sensed";  // bool expression deciding the actuation value
};

inline Fragment controller_fragment(const ControllerParams& p, const std::string& region_name, const std::string& path,
                                    sc::EventDirection trigger_direction = sc::EventDirection::Internal) {
  using namespace sc::build;
  using detail::at;
  Fragment f;
  f.region = region(region_name, {basic("WaitingforSensorData", true), basic("SensorDataReceived"), basic("TriggerActuator")});
  f.events = {{"SensorsTriggered", sc::ValueType::Bool, trigger_direction}, internal("ActuatorTriggered", sc::ValueType::Bool)};
  f.variables = {var("sensed", sc::ValueType::Bool)};
  const std::string w = at(path, "WaitingforSensorData"), r = at(path, "SensorDataReceived"), a = at(path, "TriggerActuator");
  f.transitions = {
      tr(w, r, on("SensorsTriggered"), "", {"sensed := payload"}),
      tr(r, a, always(), "", {"raise ActuatorTriggered(" + p.decision + ")"}),
      tr(a, w, always()),
  };
  return f;
}

inline sc::StatechartDef build_controller(const ControllerParams& p = {}) {
  sc::StatechartDef d;
  d.name = "Controller";
  Fragment f = controller_fragment(p, "Controller", "Controller", sc::EventDirection::In);
  merge_into(d, f);
  d.root.push_back(f.region);
  return d;
}

// ---- actuator --------------------------------------------------------------

struct ActuatorParams {
  std::vector<std::string> on_actions;   // run each time actuation is (re)asserted
  std::vector<std::string> off_actions;  // run when actuation is released
  std::string reset_event;               // optional: forces StandBy (system switched off)
};

inline Fragment actuator_fragment(const ActuatorParams& p, const std::string& region_name, const std::string& path,
                                  sc::EventDirection trigger_direction = sc::EventDirection::Internal) {
  using namespace sc::build;
  using detail::at;
  Fragment f;
  f.region = region(region_name, {basic("StandBy", true), basic("ActuatingDevice")});
  f.events = {{"ActuatorTriggered", sc::ValueType::Bool, trigger_direction}};
  f.variables = {var("actuating", sc::ValueType::Bool)};
  const std::string s = at(path, "StandBy"), a = at(path, "ActuatingDevice");
  auto with = [](std::vector<std::string> v, const std::string& first) {
    v.insert(v.begin(), first);
    return v;
  };
  f.transitions = {
      tr(s, a, on("ActuatorTriggered"), "payload", with(p.on_actions, "actuating := true")),
      tr(a, a, on("ActuatorTriggered"), "payload", p.on_actions),
      tr(a, s, on("ActuatorTriggered"), "!payload", with(p.off_actions, "actuating := false")),
  };
  if (!p.reset_event.empty()) f.transitions.push_back(tr(a, s, on(p.reset_event), "", {"actuating := false"}));
  return f;
}

inline sc::StatechartDef build_actuator(const ActuatorParams& p = {}) {
  sc::StatechartDef d;
  d.name = "Actuator";
  Fragment f = actuator_fragment(p, "Actuator", "Actuator", sc::EventDirection::In);
  merge_into(d, f);
  d.root.push_back(f.region);
  return d;
}

// ---- network ---------------------------------------------------------------

struct NetworkParams {
  std::int64_t timeout_period_ms = 60'000;
  std::int64_t reconnect_delay_ms = 1'000;
  std::int64_t connect_ms = 200;
};

/// WiFi network region. `link_ok` may be injected to simulate a lost link.
inline Fragment network_wifi_fragment(const NetworkParams& p, const std::string& region_name, const std::string& path,
                                      const Switching& sw) {
  using namespace sc::build;
  using detail::at;
  detail::require(p.timeout_period_ms > 0 && p.reconnect_delay_ms > 0 && p.connect_ms > 0,
                  "network durations must be positive");
  Fragment f;
  f.region = region(region_name, {
      basic("Off", !sw.start_on, {"online := false"}),
      composite("NetworkComponentWorking",
                region("Connection", {composite("checkingForNetworkConnection",
                                                region("Link", {basic("connectingToServer", true),
                                                                basic("connected", false, {"online := true"}),
                                                                basic("failed", false, {"online := false"})}),
                                                true)}),
                sw.start_on),
  });
  detail::switch_events(f, sw);
  f.variables = {var("online", sc::ValueType::Bool), var("link_ok", sc::ValueType::Bool, true),
                 var("reconnects", sc::ValueType::Int)};
  const std::string off = at(path, "Off"), work = at(path, "NetworkComponentWorking");
  const std::string link = at(work, "Connection/checkingForNetworkConnection/Link");
  const std::string c = at(link, "connectingToServer"), ok = at(link, "connected"), bad = at(link, "failed");
  f.transitions = {
      tr(off, work, on(sw.on_event)),
      tr(work, off, on(sw.off_event)),
      tr(c, ok, after(p.connect_ms), "link_ok"),
      tr(c, bad, after(p.connect_ms), "!link_ok"),
      tr(ok, bad, always(), "!link_ok"),
      tr(ok, c, after(p.timeout_period_ms), "", {"reconnects := reconnects + 1"}),
      tr(bad, c, after(p.reconnect_delay_ms)),
  };
  return f;
}

inline sc::StatechartDef build_network_wifi(const NetworkParams& p = {}) {
  sc::StatechartDef d;
  d.name = "WiFiNetwork";
  Fragment f = network_wifi_fragment(p, "Network", "Network", Switching{"on", "off", sc::EventDirection::In, true});
  merge_into(d, f);
  d.root.push_back(f.region);
  return d;
}

// ---- power -----------------------------------------------------------------

struct PowerParams {
  double rated_kw = 0.0;
};

/// Power region: energy_kwh is booked when ConsumingPower is left.
inline Fragment power_fragment(const PowerParams& p, const std::string& region_name, const std::string& path,
                               const Switching& sw) {
  using namespace sc::build;
  using detail::at;
  detail::require(p.rated_kw >= 0.0, "rated_kw must not be negative");
  Fragment f;
  f.region = region(region_name, {composite(
      "PowerStatus",
      region("Consumption",
             {basic("NoPowerConsumed", !sw.start_on),
              basic("ConsumingPower", sw.start_on, {"consuming := true", "consume_since := now", "draw_kw := rated_kw"},
                    {"energy_kwh := energy_kwh + rated_kw * (now - consume_since) / 3600000.0", "consuming := false",
                     "draw_kw := 0.0"})}),
      true)});
  detail::switch_events(f, sw);
  f.variables = {var("consuming", sc::ValueType::Bool), var("rated_kw", sc::ValueType::Real, p.rated_kw),
                 var("draw_kw", sc::ValueType::Real), var("energy_kwh", sc::ValueType::Real),
                 var("consume_since", sc::ValueType::Int)};
  const std::string base = at(path, "PowerStatus/Consumption");
  const std::string idle = at(base, "NoPowerConsumed"), busy = at(base, "ConsumingPower");
  f.transitions = {tr(idle, busy, on(sw.on_event)), tr(busy, idle, on(sw.off_event))};
  return f;
}

inline sc::StatechartDef build_power(const PowerParams& p = {}) {
  sc::StatechartDef d;
  d.name = "Power";
  Fragment f = power_fragment(p, "Power", "Power", Switching{"device_on", "device_off", sc::EventDirection::In, false});
  merge_into(d, f);
  d.root.push_back(f.region);
  return d;
}

// ---- physical entity -------------------------------------------------------

/// Orthogonal entity over the named components: "generic_sensor" or
/// "ultrasonic_sensor", "controller", "actuator", "power".
inline sc::StatechartDef build_physical_entity(const std::vector<std::string>& components, std::string name = "PhysicalEntity") {
  if (components.empty()) throw TemplateError(TemplateErrorKind::InvalidParams, "physical entity needs components");
  static const std::set<std::string> known{"generic_sensor", "ultrasonic_sensor", "controller", "actuator", "power"};
  std::set<std::string> seen;
  for (const auto& c : components) {
    if (!known.count(c)) throw TemplateError(TemplateErrorKind::UnknownComponent, c);
    if (!seen.insert(c).second) throw TemplateError(TemplateErrorKind::InvalidParams, "component listed twice: " + c);
  }
  if (seen.count("generic_sensor") && seen.count("ultrasonic_sensor"))
    throw TemplateError(TemplateErrorKind::InvalidParams, "one sensor per physical entity");

  sc::StatechartDef d;
  d.name = std::move(name);
  std::vector<sc::Region> regions;
  const std::string top = "Entity/" + d.name;
  auto add = [&](const Fragment& f) {
    merge_into(d, f);
    regions.push_back(f.region);
  };
  const bool has_controller = seen.count("controller") > 0;
  auto dir = [&](bool linked) { return linked ? sc::EventDirection::Internal : sc::EventDirection::In; };
  for (const auto& c : components) {
    if (c == "generic_sensor" || c == "ultrasonic_sensor") {
      SensorParams sp;
      sp.kind = c == "ultrasonic_sensor" ? SensorKind::Ultrasonic : SensorKind::Generic;
      add(sensor_fragment(sp, "Sensor", top + "/Sensor", Switching{"toggle", "toggle", sc::EventDirection::In, true}));
    } else if (c == "controller") {
      const bool has_sensor = seen.count("generic_sensor") || seen.count("ultrasonic_sensor");
      add(controller_fragment({}, "Controller", top + "/Controller", dir(has_sensor)));
    } else if (c == "actuator") {
      add(actuator_fragment({}, "Actuator", top + "/Actuator", dir(has_controller)));
    } else if (c == "power") {
      add(power_fragment({}, "Power", top + "/Power", Switching{"device_on", "device_off", sc::EventDirection::In, false}));
    }
  }
  auto top_state = regions.size() == 1 ? sc::build::composite(d.name, std::move(regions[0]), true)
                                       : sc::build::orthogonal(d.name, std::move(regions), true);
  d.root.push_back(sc::build::region("Entity", {std::move(top_state)}));
  return d;
}

inline sc::StatechartDef build_ultrasonic_motion_detector() {
  return build_physical_entity({"ultrasonic_sensor", "controller", "actuator"}, "UltrasonicMotionDetector");
}

}  // namespace stl4iot::templates
