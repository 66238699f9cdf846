#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stl4iot/sc/compose.hpp"
#include "stl4iot/templates/components.hpp"

namespace stl4iot::templates {

/// A base-unit out event surfaced by the system: either delivered to the
/// system as an in event of the same payload, or re-emitted unchanged.
struct UpRoute {
  std::string base_event;
  std::string system_event;
  bool deliver = false;
};

struct SystemParams {
  std::string name = "SmartSystem";
  std::vector<SensorParams> sensors{SensorParams{}};
  ControllerParams controller;
  ActuatorParams actuator;
  NetworkParams network;
  PowerParams power;
  bool auto_on = false;
  std::vector<std::string> off_conditions;  // bool guards that force the system off while on
  std::vector<std::string> forward;         // system in events passed down to the base unit
  std::vector<UpRoute> up;
  std::vector<Fragment> extra_regions;      // placed after BaseSystemUnit
};

inline const std::vector<std::string>& iot_region_names() {
  static const std::vector<std::string> names{"DeviceSwitchStatus", "Sensor", "Controller", "Actuator",
                                              "Network", "Power", "BaseSystemUnit"};
  return names;
}

/// Path of the top state that holds the component regions.
inline std::string system_top(const std::string& name) { return "system/" + name; }

/// Seven-region IoT system with `base_unit` bound to slot "base". The base
/// unit must accept `power_on` and `power_off`.
inline sc::StatechartDef assemble_iot_system(std::shared_ptr<const sc::StatechartDef> base_unit, const SystemParams& p) {
  using namespace sc::build;
  using detail::at;
  if (!base_unit) throw TemplateError(TemplateErrorKind::InvalidParams, "base unit missing");
  if (p.sensors.empty()) throw TemplateError(TemplateErrorKind::InvalidParams, "system needs a sensor");
  for (const char* e : {"power_on", "power_off"}) {
    const auto* d = base_unit->find_event(e);
    if (!d || d->direction != sc::EventDirection::In)
      throw TemplateError(TemplateErrorKind::InvalidParams, base_unit->name + " must accept " + e);
  }

  sc::StatechartDef d;
  d.name = p.name;
  const std::string top = system_top(p.name);
  std::vector<sc::Region> regions;

  // DeviceSwitchStatus
  {
    const std::string ds = at(top, "DeviceSwitchStatus");
    const std::string off = at(ds, "off"), on_ = at(ds, "on");
    const std::vector<std::string> turn_on{"raise system_on", "send base.power_on", "emit status_changed(true)"};
    const std::vector<std::string> turn_off{"raise system_off", "send base.power_off", "emit status_changed(false)"};
    d.events = {in("on"), in("off"), in("shed"), in("auto_off"), out("status_changed", sc::ValueType::Bool),
                internal("system_on"), internal("system_off")};
    d.variables = {var("on", sc::ValueType::Bool), var("auto_on", sc::ValueType::Bool, p.auto_on)};
    regions.push_back(region("DeviceSwitchStatus", {basic("off", true, {"on := false"}), basic("on", false, {"on := true"})}));
    d.transitions.push_back(tr(off, on_, on("on"), "", turn_on));
    d.transitions.push_back(tr(off, on_, always(), "auto_on", turn_on));
    for (const char* e : {"off", "shed", "auto_off"}) d.transitions.push_back(tr(on_, off, on(e), "", turn_off));
    for (const auto& g : p.off_conditions) d.transitions.push_back(tr(on_, off, always(), g, turn_off));
    // A shed request on a system that is already off is acknowledged so the hub can move on.
    d.transitions.push_back(local(off, on("shed"), "", {"emit status_changed(false)"}));
  }

  // Sensor
  if (p.sensors.size() == 1) {
    Fragment f = sensor_fragment(p.sensors[0], "Sensor", at(top, "Sensor"), system_switching());
    merge_into(d, f);
    regions.push_back(f.region);
  } else {
    std::vector<sc::Region> subs;
    for (const auto& s : p.sensors) {
      Fragment f = sensor_fragment(s, s.name, at(top, "Sensor/SensorArray/" + s.name), system_switching());
      merge_into(d, f);
      subs.push_back(f.region);
    }
    regions.push_back(region("Sensor", {orthogonal("SensorArray", std::move(subs), true)}));
  }

  auto place = [&](const Fragment& f) {
    merge_into(d, f);
    regions.push_back(f.region);
  };
  place(controller_fragment(p.controller, "Controller", at(top, "Controller")));
  ActuatorParams ap = p.actuator;
  if (ap.reset_event.empty()) ap.reset_event = "system_off";
  place(actuator_fragment(ap, "Actuator", at(top, "Actuator")));
  place(network_wifi_fragment(p.network, "Network", at(top, "Network"), system_switching()));
  place(power_fragment(p.power, "Power", at(top, "Power"), system_switching()));
  regions.push_back(region("BaseSystemUnit", {basic("BaseUnitAttached", true)}));
  for (const auto& f : p.extra_regions) place(f);

  d.root.push_back(region("system", {orthogonal(p.name, std::move(regions), true)}));

  std::vector<sc::EventRoute> wiring;
  for (const auto& e : p.forward) {
    const auto* be = base_unit->find_event(e);
    if (!be) throw TemplateError(TemplateErrorKind::InvalidParams, "base unit has no event " + e);
    declare(d, in(e, be->payload));
    wiring.push_back({sc::EventRoute::Direction::Down, e, e});
  }
  for (const auto& u : p.up) {
    const auto* be = base_unit->find_event(u.base_event);
    if (!be) throw TemplateError(TemplateErrorKind::InvalidParams, "base unit has no event " + u.base_event);
    declare(d, u.deliver ? in(u.system_event, be->payload) : out(u.system_event, be->payload));
    wiring.push_back({sc::EventRoute::Direction::Up, u.base_event, u.system_event});
  }
  d.slots.push_back({"base", nullptr, {}});
  return sc::embed_submachine(d, "base", std::move(base_unit), std::move(wiring));
}

}  // namespace stl4iot::templates
