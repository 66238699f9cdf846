#pragma once

// Every builder at default parameters, by file name. The dump tool and the
// golden tests both enumerate this list.

#include <string>
#include <utility>
#include <vector>

#include "stl4iot/home/smart_home.hpp"
#include "stl4iot/templates/components.hpp"

namespace stl4iot::home {

inline std::vector<std::pair<std::string, sc::StatechartDef>> template_library() {
  namespace t = templates;
  return {
      {"sensor", t::build_sensor()},
      {"controller", t::build_controller()},
      {"actuator", t::build_actuator()},
      {"network_wifi", t::build_network_wifi()},
      {"power", t::build_power()},
      {"physical_entity", t::build_physical_entity({"generic_sensor", "controller", "actuator", "power"})},
      {"ultrasonic_motion_detector", t::build_ultrasonic_motion_detector()},
      {"base_fire", *base_fire({})},
      {"base_tv", *base_tv({})},
      {"base_microwave", *base_microwave({})},
      {"base_lights", *base_lights({})},
      {"smart_fire", smart_fire()},
      {"smart_tv", smart_tv()},
      {"smart_microwave", smart_microwave()},
      {"smart_lights", smart_lights()},
      {"lights_hub", build_lights_hub(3)},
      {"smart_home", build_smart_home()},
  };
}

}  // namespace stl4iot::home
