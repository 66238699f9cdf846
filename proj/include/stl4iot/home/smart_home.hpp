#pragma once

// Smart systems of the case-study home and the hubs that manage them.

#include <memory>
#include <string>
#include <vector>

#include "stl4iot/home/base_units.hpp"
#include "stl4iot/templates/hub.hpp"
#include "stl4iot/templates/iot_system.hpp"

namespace stl4iot::home {

using templates::SensorKind;
using templates::SensorParams;
using templates::SystemParams;

inline std::string real_literal(double v) {
  std::string s = sc::Value::format_real(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline SensorParams threshold_sensor(const std::string& name, double threshold, std::int64_t period_ms) {
  SensorParams s;
  s.name = name;
  s.prefix = name + "_";
  s.period_ms = period_ms;
  s.input_event = name;
  s.input_type = sc::ValueType::Real;
  s.activity_condition = "payload >= " + real_literal(threshold);
  return s;
}

inline SensorParams presence_sensor(const std::string& input, std::int64_t period_ms) {
  SensorParams s;
  s.name = input;
  s.kind = SensorKind::Ultrasonic;
  s.period_ms = period_ms;
  s.input_event = input;
  return s;
}

inline void actuate_base(SystemParams& p) {
  p.actuator.on_actions = {"send base.actuate(true)"};
  p.actuator.off_actions = {"send base.actuate(false)"};
}

/// Always-on fire monitoring over heat, smoke and carbon monoxide sensors.
inline sc::StatechartDef smart_fire(const FireConfig& c = {}) {
  SystemParams p;
  p.name = "SmartFireSystem";
  p.sensors = {threshold_sensor("heat", c.heat, c.sensor_period_ms), threshold_sensor("smoke", c.smoke, c.sensor_period_ms),
               threshold_sensor("carbon", c.carbon, c.sensor_period_ms)};
  p.controller.decision = "heat_activity || smoke_activity || carbon_activity";
  actuate_base(p);
  p.power.rated_kw = c.rated_kw;
  p.auto_on = true;
  p.forward = {"clear_alarm"};
  p.up = {{"emergency", "emergency", false}, {"alarm_cleared", "alarm_cleared", false}};
  return templates::assemble_iot_system(base_fire(c), p);
}

/// TV that prompts after inactivity and switches itself off when unanswered.
inline sc::StatechartDef smart_tv(const TvConfig& c = {}) {
  SystemParams p;
  p.name = "SmartTV";
  p.sensors = {presence_sensor("presence", c.sensor_period_ms)};
  actuate_base(p);
  p.power.rated_kw = c.rated_kw;
  p.forward = {"prompt_response", "channel_up", "channel_down", "set_channel", "set_input"};
  p.up = {{"request_off", "auto_off", true}, {"prompt", "prompt", false}};
  return templates::assemble_iot_system(base_tv(c), p);
}

/// Microwave gated by a weight sensor and shut off by its temperature sensor.
inline sc::StatechartDef smart_microwave(const MicrowaveConfig& c = {}) {
  SystemParams p;
  p.name = "SmartMicrowave";
  p.sensors = {threshold_sensor("weight", c.min_weight, c.sensor_period_ms),
               threshold_sensor("temperature", c.heat_threshold, c.sensor_period_ms)};
  p.controller.decision = "weight_activity";
  actuate_base(p);
  p.power.rated_kw = c.rated_kw;
  p.off_conditions = {"temperature_activity"};
  p.forward = {"door", "start", "add_time"};
  p.up = {{"start_rejected", "start_rejected", false}, {"cook_done", "cook_done", false}};
  return templates::assemble_iot_system(base_microwave(c), p);
}

/// Motion-activated dimmable LED lights.
inline sc::StatechartDef smart_lights(const LightsConfig& c = {}) {
  SystemParams p;
  p.name = "SmartLights";
  p.sensors = {presence_sensor("motion", c.sensor_period_ms)};
  actuate_base(p);
  p.power.rated_kw = c.rated_kw;
  p.forward = {"dim", "brighten"};
  return templates::assemble_iot_system(base_lights(c), p);
}

inline std::string light_id(std::size_t i) { return "light_" + std::to_string(i + 1); }

/// Hub of `n` smart lights with its own power manager.
inline sc::StatechartDef build_lights_hub(std::size_t n, const LightsConfig& c = {}, double threshold_kw = 3.0) {
  detail::require(n >= 1, "lights hub needs at least one light");
  auto def = std::make_shared<const sc::StatechartDef>(smart_lights(c));
  templates::HubSpec spec;
  spec.name = "LightsHub";
  spec.power_threshold_kw = threshold_kw;
  for (std::size_t i = 0; i < n; ++i) spec.systems.push_back({light_id(i), def, c.rated_kw, true});
  return templates::assemble_hub(spec);
}

struct HomeSpec {
  FireConfig fire;
  TvConfig tv;
  MicrowaveConfig microwave;
  LightsConfig lights;
  std::size_t n_lights = 3;
  double power_threshold_kw = 3.0;
  double lights_threshold_kw = 3.0;
};

/// The smart home hub: fire (autonomous), TV, microwave and a lights sub-hub.
inline sc::StatechartDef build_smart_home(const HomeSpec& s = {}) {
  templates::HubSpec spec;
  spec.name = "SmartHomeHub";
  spec.power_threshold_kw = s.power_threshold_kw;
  spec.systems = {
      {"fire", std::make_shared<const sc::StatechartDef>(smart_fire(s.fire)), s.fire.rated_kw, false},
      {"tv", std::make_shared<const sc::StatechartDef>(smart_tv(s.tv)), s.tv.rated_kw, true},
      {"microwave", std::make_shared<const sc::StatechartDef>(smart_microwave(s.microwave)), s.microwave.rated_kw, true},
      {"lights", std::make_shared<const sc::StatechartDef>(build_lights_hub(s.n_lights, s.lights, s.lights_threshold_kw)),
       s.lights.rated_kw * static_cast<double>(s.n_lights), true},
  };
  return templates::assemble_hub(spec);
}

}  // namespace stl4iot::home
