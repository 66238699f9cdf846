#pragma once

#include <string>
#include <vector>

#include "stl4iot/sc/engine.hpp"
#include "stl4iot/templates/components.hpp"

namespace stl4iot::templates {

struct PowerStatus {
  bool on = false;
  double rated_kw = 0.0;
};

inline double total_power(const std::vector<PowerStatus>& statuses) {
  double sum = 0.0;
  for (const auto& s : statuses)
    if (s.on) sum += s.rated_kw;
  return sum;
}

struct PowerDraw {
  std::string system_id;
  double draw_kw = 0.0;
  bool hub_toggleable = true;
};

/// The toggleable system drawing the most power; the lowest index wins ties.
inline std::string select_max_contributor(const std::vector<PowerDraw>& powers) {
  const PowerDraw* best = nullptr;
  for (const auto& p : powers)
    if (p.hub_toggleable && p.draw_kw > 0.0 && (!best || p.draw_kw > best->draw_kw)) best = &p;
  if (!best) throw TemplateError(TemplateErrorKind::NoCandidate, "no toggleable system draws power");
  return best->system_id;
}

/// Energy of a machine carrying the power component, including the interval still open.
inline double live_energy_kwh(const sc::MachineInstance& m) {
  double e = m.read_var("energy_kwh").as_real();
  if (m.read_var("consuming").as_bool())
    e += m.read_var("rated_kw").as_real() * static_cast<double>(m.now() - m.read_var("consume_since").as_int()) / 3600000.0;
  return e;
}

}  // namespace stl4iot::templates
