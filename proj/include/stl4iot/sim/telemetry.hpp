#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stl4iot/sc/engine.hpp"
#include "stl4iot/templates/power_policy.hpp"

namespace stl4iot::sim {

using Json = nlohmann::ordered_json;

/// A smart system (a machine carrying a base unit) or a hub in the tree.
struct CatalogEntry {
  std::string id;  // machine path; "hub" for the root
  std::string name;
  bool is_hub = false;
  bool hub_toggleable = false;
  std::string parent;  // path of the managing hub, "" for the root
};

inline std::string last_segment(const std::string& path) {
  auto pos = path.rfind('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

inline std::string parent_path(const std::string& path) {
  auto pos = path.rfind('/');
  return pos == std::string::npos ? "" : path.substr(0, pos);
}

inline bool is_system(const sc::MachineInstance& m) { return m.child("base") != nullptr; }
inline bool is_hub(const sc::MachineInstance& m) { return !is_system(m) && m.has_var("lockdown"); }

inline std::vector<CatalogEntry> catalog(const sc::MachineInstance& root) {
  std::vector<CatalogEntry> out;
  auto walk = [&](auto&& self, const sc::MachineInstance& m) -> void {
    if (is_system(m) || is_hub(m)) {
      CatalogEntry e;
      e.id = m.path().empty() ? "hub" : m.path();
      e.name = m.chart().name;
      e.is_hub = is_hub(m);
      if (!m.path().empty()) {
        e.parent = parent_path(m.path());
        const auto* p = e.parent.empty() ? &root : root.find(e.parent);
        e.hub_toggleable = p && p->chart().find_event("toggle_" + last_segment(m.path())) >= 0;
      }
      out.push_back(std::move(e));
    }
    if (is_system(m)) return;
    for (const auto* c : m.children()) self(self, *c);
  };
  walk(walk, root);
  return out;
}

inline Json catalog_json(const std::vector<CatalogEntry>& cat) {
  Json a = Json::array();
  for (const auto& e : cat)
    a.push_back({{"id", e.id}, {"name", e.name}, {"kind", e.is_hub ? "hub" : "system"},
                 {"hub_toggleable", e.hub_toggleable}, {"parent", e.parent.empty() && e.id != "hub" ? "hub" : e.parent}});
  return a;
}

/// Names of the active basic states, in document order.
inline std::string state_summary(const sc::MachineInstance& m) {
  std::string s;
  const auto& c = m.chart();
  for (const auto& path : m.local_configuration()) {
    const auto& st = c.states[static_cast<std::size_t>(c.find_state(path))];
    if (st.kind != sc::StateKind::Basic) continue;
    if (!s.empty()) s += ",";
    s += st.name;
  }
  return s;
}

struct SystemSample {
  std::string id;
  bool on = false;
  bool online = false;
  double kw = 0.0;
  double kwh = 0.0;
  std::string state;
};

struct TelemetrySample {
  std::int64_t t_ms = 0;
  std::vector<SystemSample> systems;
  double total_kw = 0.0;
  double total_kwh = 0.0;
  double carbon = 0.0, smoke = 0.0, heat = 0.0;
  bool lockdown = false;
  std::string hub_state;
  std::vector<std::pair<std::string, double>> contributions;
  bool well_formed = true;
};

inline TelemetrySample take_sample(const sc::MachineInstance& root, const std::vector<CatalogEntry>& cat) {
  TelemetrySample s;
  s.t_ms = root.now();
  bool levels = false;
  for (const auto& e : cat) {
    if (e.is_hub) continue;
    const auto* m = root.find(e.id);
    SystemSample ss;
    ss.id = e.id;
    ss.on = m->read_var("on").as_bool();
    ss.online = m->read_var("online").as_bool();
    ss.kw = m->read_var("draw_kw").as_real();
    ss.kwh = templates::live_energy_kwh(*m);
    ss.state = state_summary(*m->child("base"));
    s.total_kw += ss.kw;
    s.total_kwh += ss.kwh;
    if (!levels && m->has_var("heat_level")) {
      levels = true;
      s.heat = m->read_var("heat_level").as_real();
      s.smoke = m->read_var("smoke_level").as_real();
      s.carbon = m->read_var("carbon_level").as_real();
    }
    s.systems.push_back(std::move(ss));
  }
  if (s.total_kw > 0.0)
    for (const auto& ss : s.systems)
      if (ss.kw > 0.0) s.contributions.emplace_back(ss.id, 100.0 * ss.kw / s.total_kw);
  if (root.has_var("lockdown")) s.lockdown = root.read_var("lockdown").as_bool();
  for (const char* st : {"Normal", "EmergencyState"})
    if (root.is_active(st)) s.hub_state = st;
  s.well_formed = root.check_well_formed().empty();
  return s;
}

inline Json to_json(const TelemetrySample& s) {
  Json systems = Json::object();
  for (const auto& x : s.systems)
    systems[x.id] = {{"status", x.on ? "on" : "off"}, {"online", x.online}, {"kw", x.kw}, {"kwh", x.kwh}, {"state", x.state}};
  Json contrib = Json::object();
  for (const auto& [id, pct] : s.contributions) contrib[id] = pct;
  return Json{{"t_ms", s.t_ms},
              {"systems", systems},
              {"totals", {{"kw", s.total_kw}, {"kwh", s.total_kwh}}},
              {"fire_levels", {{"carbon", s.carbon}, {"smoke", s.smoke}, {"heat", s.heat}}},
              {"contributions", contrib},
              {"hub", {{"state", s.hub_state}, {"lockdown", s.lockdown}}},
              {"well_formed", s.well_formed}};
}

}  // namespace stl4iot::sim
