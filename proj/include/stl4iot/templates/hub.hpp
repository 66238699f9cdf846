#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "stl4iot/sc/compose.hpp"
#include "stl4iot/templates/components.hpp"

namespace stl4iot::templates {

struct HubMember {
  std::string id;
  std::shared_ptr<const sc::StatechartDef> def;
  double rated_kw = 0.0;
  bool hub_toggleable = true;
};

struct HubSpec {
  std::string name = "SmartHub";
  std::vector<HubMember> systems;
  double power_threshold_kw = 3.0;
  NetworkParams network;
};

inline std::string hub_top(const std::string& name) { return "hub/" + name; }

namespace detail {

inline bool has_event(const sc::StatechartDef& d, const std::string& name, sc::EventDirection dir) {
  const auto* e = d.find_event(name);
  return e && e->direction == dir;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep, const std::string& empty) {
  if (parts.empty()) return empty;
  std::string s = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) s += sep + parts[i];
  return s;
}

}  // namespace detail

/// Hub over `spec.systems`: one region per member, SystemStatus (emergency
/// lockdown), HubPowerManager and Network. Members must accept on/off/shed,
/// emit status_changed(bool) and expose on, online and draw_kw.
inline sc::StatechartDef assemble_hub(const HubSpec& spec) {
  using namespace sc::build;
  using detail::at;
  using detail::join;
  detail::require(spec.power_threshold_kw > 0.0, "power threshold must be positive");
  detail::require(!spec.systems.empty(), "hub needs at least one system");
  std::set<std::string> ids;
  for (const auto& m : spec.systems) {
    if (!ids.insert(m.id).second) throw TemplateError(TemplateErrorKind::DuplicateSystemId, m.id);
    detail::require(m.def != nullptr, "member " + m.id + " has no definition");
    for (const char* e : {"on", "off", "shed"})
      detail::require(detail::has_event(*m.def, e, sc::EventDirection::In), m.id + " must accept " + e);
    detail::require(detail::has_event(*m.def, "status_changed", sc::EventDirection::Out), m.id + " must emit status_changed");
    for (const char* v : {"on", "online", "draw_kw"})
      detail::require(m.def->find_variable(v) != nullptr, m.id + " must expose " + v);
  }

  sc::StatechartDef d;
  d.name = spec.name;
  const std::string top = hub_top(spec.name);
  d.events = {in("HUBAllSystemsON"), in("HUBAllSystemsOFF"), in("on"), in("off"), in("shed"),
              in("parent_lockdown", sc::ValueType::Bool), out("status_changed", sc::ValueType::Bool),
              internal("lockdown_on"), internal("PowerThresholdReached")};
  d.variables = {var("lockdown", sc::ValueType::Bool), var("total_kw", sc::ValueType::Real),
                 var("draw_kw", sc::ValueType::Real), var("on", sc::ValueType::Bool),
                 var("power_threshold_kw", sc::ValueType::Real, spec.power_threshold_kw),
                 var("shed_count", sc::ValueType::Int)};

  std::vector<std::string> draws, ons;
  for (const auto& m : spec.systems) {
    draws.push_back(m.id + ".draw_kw");
    ons.push_back(m.id + ".on");
  }
  const std::string total = "(" + join(draws, " + ", "0.0") + ")";
  const std::string any_on = "(" + join(ons, " || ", "false") + ")";

  std::vector<sc::Region> regions;
  std::vector<std::string> sub_hubs;

  // One region per member.
  for (const auto& m : spec.systems) {
    const std::string& x = m.id;
    const bool sub_hub = detail::has_event(*m.def, "parent_lockdown", sc::EventDirection::In);
    if (sub_hub) sub_hubs.push_back(x);
    declare(d, in(x + "_status", sc::ValueType::Bool));
    if (!m.hub_toggleable) {
      regions.push_back(region(x, {basic("Autonomous", true)}));
      continue;
    }
    regions.push_back(region(x, {basic("Managed", true)}));
    const std::string s = at(top, x + "/Managed");
    const std::string reachable = "(" + x + ".online || !" + x + ".on)";
    declare(d, in("toggle_" + x));
    auto& t = d.transitions;
    t.push_back(local(s, on("toggle_" + x), "!lockdown && " + reachable + " && !" + x + ".on", {"send " + x + ".on"}));
    t.push_back(local(s, on("toggle_" + x), "!lockdown && " + reachable + " && " + x + ".on", {"send " + x + ".off"}));
    for (const char* e : {"HUBAllSystemsON", "on"})
      t.push_back(local(s, on(e), "!lockdown && " + reachable + " && !" + x + ".on", {"send " + x + ".on"}));
    for (const char* e : {"HUBAllSystemsOFF", "off"})
      t.push_back(local(s, on(e), reachable + " && " + x + ".on", {"send " + x + ".off"}));
    t.push_back(local(s, on("shed"), x + ".on", {"send " + x + ".off"}));
    if (sub_hub) t.push_back(local(s, on("lockdown_on"), "", {"send " + x + ".parent_lockdown(true)"}));
    else t.push_back(local(s, on("lockdown_on"), x + ".on", {"send " + x + ".off"}));
  }

  // SystemStatus: emergency lockdown.
  {
    const std::string st = at(top, "SystemStatus");
    const std::string normal = at(st, "Normal"), emergency = at(st, "EmergencyState");
    std::vector<std::string> release{"lockdown := false"};
    for (const auto& h : sub_hubs) release.push_back("send " + h + ".parent_lockdown(false)");
    regions.push_back(region("SystemStatus", {basic("Normal", true),
                                              basic("EmergencyState", false, {"lockdown := true", "raise lockdown_on"}, release)}));
    for (const auto& m : spec.systems) {
      if (detail::has_event(*m.def, "emergency", sc::EventDirection::Out)) {
        declare(d, in(m.id + "_emergency"));
        d.transitions.push_back(tr(normal, emergency, on(m.id + "_emergency")));
      }
      if (detail::has_event(*m.def, "alarm_cleared", sc::EventDirection::Out)) {
        declare(d, in(m.id + "_alarm_cleared"));
        d.transitions.push_back(tr(emergency, normal, on(m.id + "_alarm_cleared")));
      }
    }
    d.transitions.push_back(tr(normal, emergency, on("parent_lockdown"), "payload"));
    d.transitions.push_back(tr(emergency, normal, on("parent_lockdown"), "!payload"));
  }

  // HubPowerManager: metering and the shedding policy.
  {
    const std::string pm = at(top, "HubPowerManager/PowerManager");
    const std::string meter = at(pm, "Meter/Metering");
    const std::string policy = at(pm, "Policy");
    const std::string calc = at(policy, "PowerConsumptionCalculator"), check = at(policy, "CheckingDevicePowerContribution");
    std::vector<sc::StateNode> policy_states{basic("PowerConsumptionCalculator", true), basic("CheckingDevicePowerContribution")};
    const std::string over = total + " > power_threshold_kw";

    std::vector<const HubMember*> toggleable;
    for (const auto& m : spec.systems)
      if (m.hub_toggleable) toggleable.push_back(&m);
    auto eligible = [](const HubMember& m) { return "(" + m.id + ".draw_kw > 0.0)"; };
    std::vector<std::string> any_eligible;
    for (const auto* m : toggleable) any_eligible.push_back(eligible(*m));

    auto& t = d.transitions;
    for (const auto& m : spec.systems) {
      t.push_back(local(meter, on(m.id + "_status"), "",
                        {"total_kw := " + total, "draw_kw := total_kw", "on := " + any_on, "emit status_changed(on)"}));
      t.push_back(local(calc, on(m.id + "_status"), over, {"raise PowerThresholdReached"}));
    }
    t.push_back(tr(calc, check, on("PowerThresholdReached")));
    t.push_back(tr(check, calc, always(), "!(" + over + ") || !(" + join(any_eligible, " || ", "false") + ")"));
    for (std::size_t i = 0; i < toggleable.size(); ++i) {
      const auto& m = *toggleable[i];
      std::string guard = over + " && " + eligible(m);
      for (std::size_t j = 0; j < toggleable.size(); ++j) {
        if (j == i) continue;
        const auto& o = *toggleable[j];
        guard += " && (!" + eligible(o) + " || " + m.id + ".draw_kw " + (j < i ? ">" : ">=") + " " + o.id + ".draw_kw)";
      }
      const std::string wait = "Awaiting_" + m.id;
      policy_states.push_back(basic(wait));
      t.push_back(tr(check, at(policy, wait), always(), guard, {"send " + m.id + ".shed", "shed_count := shed_count + 1"}));
      // a status queued before the shed landed is stale; wait for the draw to drop
      t.push_back(tr(at(policy, wait), check, on(m.id + "_status"), "!" + eligible(m)));
      t.push_back(tr(at(policy, wait), check, after(std::int64_t{5000})));
    }
    regions.push_back(region("HubPowerManager",
                             {orthogonal("PowerManager",
                                         {region("Meter", {basic("Metering", true)}), region("Policy", std::move(policy_states))},
                                         true)}));
  }

  {
    Fragment f = network_wifi_fragment(spec.network, "Network", at(top, "Network"),
                                       Switching{"network_on", "network_off", sc::EventDirection::In, true});
    merge_into(d, f);
    regions.push_back(f.region);
  }

  d.root.push_back(region("hub", {orthogonal(spec.name, std::move(regions), true)}));
  for (const auto& m : spec.systems) d.slots.push_back({m.id, nullptr, {}});

  sc::StatechartDef out = d;
  for (const auto& m : spec.systems) {
    std::vector<sc::EventRoute> wiring{{sc::EventRoute::Direction::Up, "status_changed", m.id + "_status"}};
    if (detail::has_event(*m.def, "emergency", sc::EventDirection::Out))
      wiring.push_back({sc::EventRoute::Direction::Up, "emergency", m.id + "_emergency"});
    if (detail::has_event(*m.def, "alarm_cleared", sc::EventDirection::Out))
      wiring.push_back({sc::EventRoute::Direction::Up, "alarm_cleared", m.id + "_alarm_cleared"});
    out = sc::embed_submachine(out, m.id, m.def, std::move(wiring));
  }
  return out;
}

}  // namespace stl4iot::templates
