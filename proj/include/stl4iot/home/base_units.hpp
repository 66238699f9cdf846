#pragma once

// Base system units: the non-smart appliances the smart systems are built
// around. Each accepts power_on/power_off and actuate(bool) from its system.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stl4iot/sc/model.hpp"
#include "stl4iot/templates/components.hpp"

namespace stl4iot::home {

struct FireConfig {
  double carbon = 70.0;
  double smoke = 50.0;
  double heat = 60.0;
  std::int64_t warn1_ms = 10'000;
  std::int64_t warn2_ms = 10'000;
  double rated_kw = 0.005;
  std::int64_t sensor_period_ms = 500;
};

struct TvConfig {
  std::int64_t inactivity_ms = 30'000;
  std::int64_t prompt_timeout_ms = 10'000;
  std::int64_t channels = 99;
  std::vector<std::string> inputs{"TV", "HDMI1", "HDMI2"};
  double rated_kw = 0.15;
  std::int64_t sensor_period_ms = 500;
};

struct MicrowaveConfig {
  double heat_threshold = 90.0;
  double min_weight = 50.0;
  std::int64_t standby_timeout_ms = 20'000;
  double rated_kw = 1.2;
  std::int64_t sensor_period_ms = 500;
};

struct LightsConfig {
  std::int64_t inactivity_ms = 15'000;
  std::int64_t dim_levels = 5;
  double rated_kw = 0.01;
  std::int64_t sensor_period_ms = 500;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw templates::TemplateError(templates::TemplateErrorKind::InvalidParams, what);
}

}  // namespace detail

inline void check(const FireConfig& c) {
  detail::require(c.carbon > 0 && c.smoke > 0 && c.heat > 0, "fire thresholds must be positive");
  detail::require(c.warn1_ms > 0 && c.warn2_ms > 0, "fire warning timers must be positive");
}
inline void check(const TvConfig& c) {
  detail::require(c.inactivity_ms > 0 && c.prompt_timeout_ms > 0, "TV durations must be positive");
  detail::require(c.channels >= 1, "TV needs a channel");
  detail::require(!c.inputs.empty(), "TV needs an input source");
}
inline void check(const MicrowaveConfig& c) {
  detail::require(c.heat_threshold > 0 && c.min_weight > 0 && c.standby_timeout_ms > 0, "microwave settings must be positive");
}
inline void check(const LightsConfig& c) {
  detail::require(c.inactivity_ms > 0, "lights inactivity must be positive");
  detail::require(c.dim_levels >= 2, "lights need at least two dim levels");
}

/// safe -> Warning{InitialWarning -> FinalWarning} -> Danger. Warnings reset
/// to safe when the system withdraws actuation; Danger only ends on clear_alarm.
inline std::shared_ptr<const sc::StatechartDef> base_fire(const FireConfig& c) {
  using namespace sc::build;
  check(c);
  auto d = std::make_shared<sc::StatechartDef>();
  d->name = "BaseFire";
  d->events = {in("power_on"), in("power_off"), in("actuate", sc::ValueType::Bool), in("clear_alarm"),
               out("emergency"), out("alarm_cleared")};
  d->variables = {var("alarm", sc::ValueType::Bool), var("warning", sc::ValueType::Bool)};
  d->root = {region("main", {composite(
      "BaseFire",
      region("level", {basic("safe", true),
                       composite("Warning", region("stage", {basic("InitialWarning", true), basic("FinalWarning")}), false,
                                 {"warning := true"}, {"warning := false"}),
                       basic("Danger", false, {"alarm := true", "emit emergency"})}),
      true)})};
  const std::string b = "main/BaseFire/level/";
  d->transitions = {
      tr(b + "safe", b + "Warning", on("actuate"), "payload"),
      tr(b + "Warning/stage/InitialWarning", b + "Warning/stage/FinalWarning", after(c.warn1_ms)),
      tr(b + "Warning/stage/FinalWarning", b + "Danger", after(c.warn2_ms)),
      tr(b + "Warning", b + "safe", on("actuate"), "!payload"),
      tr(b + "Danger", b + "safe", on("clear_alarm"), "", {"alarm := false", "emit alarm_cleared"}),
  };
  return d;
}

/// Off / On{Watching, Prompting}. Activity re-enters Watching and so restarts
/// the inactivity timer; an unanswered prompt asks the system to switch off.
inline std::shared_ptr<const sc::StatechartDef> base_tv(const TvConfig& c) {
  using namespace sc::build;
  check(c);
  auto d = std::make_shared<sc::StatechartDef>();
  d->name = "BaseTV";
  d->events = {in("power_on"), in("power_off"), in("actuate", sc::ValueType::Bool), in("prompt_response"),
               in("channel_up"), in("channel_down"), in("set_channel", sc::ValueType::Int),
               in("set_input", sc::ValueType::Int), out("prompt"), out("request_off")};
  d->variables = {var("channel", sc::ValueType::Int, std::int64_t{1}), var("channels", sc::ValueType::Int, c.channels),
                  var("input", sc::ValueType::Int), var("inputs", sc::ValueType::Int, static_cast<std::int64_t>(c.inputs.size())),
                  var("prompting", sc::ValueType::Bool), var("screen_on", sc::ValueType::Bool)};
  d->root = {region("main", {composite(
      "BaseTV",
      region("power", {basic("Off", true),
                       composite("On", region("use", {basic("Watching", true),
                                                      basic("Prompting", false, {"prompting := true"}, {"prompting := false"})}),
                                 false, {"screen_on := true"}, {"screen_on := false"})}),
      true)})};
  const std::string p = "main/BaseTV/power/";
  const std::string on_ = p + "On", w = p + "On/use/Watching", pr = p + "On/use/Prompting";
  d->transitions = {
      tr(p + "Off", on_, on("power_on")),
      tr(on_, p + "Off", on("power_off")),
      tr(w, w, on("actuate"), "payload"),
      tr(w, pr, after(c.inactivity_ms), "", {"emit prompt"}),
      tr(pr, w, on("prompt_response")),
      tr(pr, w, on("actuate"), "payload"),
      tr(pr, w, after(c.prompt_timeout_ms), "", {"emit request_off"}),
      local(on_, on("channel_up"), "", {"channel := channel % channels + 1"}),
      local(on_, on("channel_down"), "", {"channel := (channel + channels - 2) % channels + 1"}),
      local(on_, on("set_channel"), "payload >= 1 && payload <= channels", {"channel := payload"}),
      local(on_, on("set_input"), "payload >= 0 && payload < inputs", {"input := payload"}),
  };
  return d;
}

/// Oven region (Off, On{Idle{StandBy, Ready}, Cooking, Paused}) beside Door
/// and Scale regions tracking the door and whether food is on the plate.
inline std::shared_ptr<const sc::StatechartDef> base_microwave(const MicrowaveConfig& c) {
  using namespace sc::build;
  check(c);
  auto d = std::make_shared<sc::StatechartDef>();
  d->name = "BaseMicrowave";
  d->events = {in("power_on"), in("power_off"), in("actuate", sc::ValueType::Bool), in("door", sc::ValueType::Bool),
               in("start", sc::ValueType::Int), in("add_time", sc::ValueType::Int), out("start_rejected", sc::ValueType::String), out("cook_done")};
  d->variables = {var("food_ok", sc::ValueType::Bool), var("door_open", sc::ValueType::Bool),
                  var("heating", sc::ValueType::Bool), var("remaining_ms", sc::ValueType::Int),
                  var("cook_started", sc::ValueType::Int)};
  d->root = {region("main", {orthogonal(
      "BaseMicrowave",
      {region("Oven", {basic("Off", true),
                       composite("On",
                                 region("mode", {composite("Idle", region("wait", {basic("StandBy", true), basic("Ready")}), true),
                                                 basic("Cooking", false, {"heating := true", "cook_started := now"},
                                                       {"heating := false", "remaining_ms := remaining_ms - (now - cook_started)"}),
                                                 basic("Paused")}))}),
       region("Door", {basic("Closed", true, {"door_open := false"}), basic("Open", false, {"door_open := true"})}),
       region("Scale", {basic("Weighing", true)})},
      true)})};
  const std::string o = "main/BaseMicrowave/Oven/";
  const std::string on_ = o + "On", idle = on_ + "/mode/Idle", standby = idle + "/wait/StandBy", ready = idle + "/wait/Ready";
  const std::string cook = on_ + "/mode/Cooking", paused = on_ + "/mode/Paused";
  const std::string door = "main/BaseMicrowave/Door/";
  d->transitions = {
      tr(o + "Off", on_, on("power_on")),
      tr(on_, o + "Off", on("power_off"), "", {"remaining_ms := 0"}),
      tr(standby, ready, on("door")),
      tr(ready, ready, on("door")),
      tr(ready, standby, after(c.standby_timeout_ms)),
      tr(idle, cook, on("start"), "food_ok && !door_open && payload > 0", {"remaining_ms := payload"}),
      local(idle, on("start"), "!food_ok", {"emit start_rejected(\"invalid weight\")"}),
      local(idle, on("start"), "food_ok && door_open", {"emit start_rejected(\"door open\")"}),
      tr(idle, cook, on("add_time"), "food_ok && !door_open && payload > 0", {"remaining_ms := payload"}),
      tr(cook, cook, on("add_time"), "payload > 0", {"remaining_ms := remaining_ms + payload"}),
      local(paused, on("add_time"), "payload > 0", {"remaining_ms := remaining_ms + payload"}),
      tr(cook, standby, after("remaining_ms"), "", {"remaining_ms := 0", "emit cook_done"}),
      tr(cook, paused, on("door"), "payload"),
      tr(cook, paused, on("actuate"), "!payload"),
      tr(paused, cook, on("start"), "food_ok && !door_open && remaining_ms > 0"),
      local(paused, on("start"), "!food_ok", {"emit start_rejected(\"invalid weight\")"}),
      tr(paused, standby, after(c.standby_timeout_ms), "", {"remaining_ms := 0"}),
      tr(door + "Closed", door + "Open", on("door"), "payload"),
      tr(door + "Open", door + "Closed", on("door"), "!payload"),
      local("main/BaseMicrowave/Scale/Weighing", on("actuate"), "", {"food_ok := payload"}),
  };
  return d;
}

/// Off / On{Unlit, Lit}; Lit times out after inactivity, re-actuation restarts it.
inline std::shared_ptr<const sc::StatechartDef> base_lights(const LightsConfig& c) {
  using namespace sc::build;
  check(c);
  auto d = std::make_shared<sc::StatechartDef>();
  d->name = "BaseLights";
  d->events = {in("power_on"), in("power_off"), in("actuate", sc::ValueType::Bool), in("dim"), in("brighten")};
  d->variables = {var("lit", sc::ValueType::Bool), var("level", sc::ValueType::Int, c.dim_levels),
                  var("dim_levels", sc::ValueType::Int, c.dim_levels)};
  d->root = {region("main", {composite(
      "BaseLights",
      region("power", {basic("Off", true),
                       composite("On", region("light", {basic("Unlit", true), basic("Lit", false, {"lit := true"}, {"lit := false"})}))}),
      true)})};
  const std::string p = "main/BaseLights/power/";
  const std::string on_ = p + "On", unlit = on_ + "/light/Unlit", lit = on_ + "/light/Lit";
  d->transitions = {
      tr(p + "Off", on_, on("power_on")),
      tr(on_, p + "Off", on("power_off")),
      tr(unlit, lit, on("actuate"), "payload"),
      tr(lit, lit, on("actuate"), "payload"),
      tr(lit, unlit, after(c.inactivity_ms)),
      local(on_, on("dim"), "level > 1", {"level := level - 1"}),
      local(on_, on("brighten"), "level < dim_levels", {"level := level + 1"}),
  };
  return d;
}

}  // namespace stl4iot::home
