#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stl4iot::sim {

using Json = nlohmann::ordered_json;

enum class CommandKind {
  ToggleSystem,
  HubAllOn,
  HubAllOff,
  TvChannel,
  TvInput,
  TvPromptResponse,
  MwDoor,
  MwStart,
  MwAddTime,
  LightsDim,
  LightsBrighten,
  TriggerSensor,
  ClearAlarm,
  SetSpeed,
};

inline const std::vector<std::pair<CommandKind, const char*>>& command_names() {
  static const std::vector<std::pair<CommandKind, const char*>> names{
      {CommandKind::ToggleSystem, "toggle_system"},
      {CommandKind::HubAllOn, "hub_all_on"},
      {CommandKind::HubAllOff, "hub_all_off"},
      {CommandKind::TvChannel, "tv_channel"},
      {CommandKind::TvInput, "tv_input"},
      {CommandKind::TvPromptResponse, "tv_prompt_response"},
      {CommandKind::MwDoor, "mw_door"},
      {CommandKind::MwStart, "mw_start"},
      {CommandKind::MwAddTime, "mw_add_time"},
      {CommandKind::LightsDim, "lights_dim"},
      {CommandKind::LightsBrighten, "lights_brighten"},
      {CommandKind::TriggerSensor, "trigger_sensor"},
      {CommandKind::ClearAlarm, "clear_alarm"},
      {CommandKind::SetSpeed, "set_speed"},
  };
  return names;
}

inline const char* to_string(CommandKind k) {
  for (const auto& [kind, name] : command_names())
    if (kind == k) return name;
  return "?";
}

enum class CommandErrorKind { BadRequest, UnknownTarget, SimulationNotRunning };

class CommandError : public std::runtime_error {
 public:
  CommandError(CommandErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  CommandErrorKind kind() const { return kind_; }

 private:
  CommandErrorKind kind_;
};

inline const char* to_string(CommandErrorKind k) {
  switch (k) {
    case CommandErrorKind::BadRequest: return "BadRequest";
    case CommandErrorKind::UnknownTarget: return "UnknownTarget";
    case CommandErrorKind::SimulationNotRunning: return "SimulationNotRunning";
  }
  return "?";
}

struct Command {
  CommandKind kind = CommandKind::ToggleSystem;
  std::string target;  // system id; may be empty for hub-wide kinds
  Json args = Json::object();

  friend bool operator==(const Command&, const Command&) = default;
};

/// Pacing requested by set_speed: virtual ms per wall ms, or unpaced.
struct Speed {
  bool max = false;
  double factor = 1.0;

  friend bool operator==(const Speed&, const Speed&) = default;
};

struct CommandResult {
  std::uint64_t seq = 0;
  std::int64_t t_ms = 0;
  Command command;
  bool accepted = false;
  std::string reason;  // empty when accepted
  Json status = Json::object();
};

inline Json to_json(const Command& c) {
  return {{"kind", to_string(c.kind)}, {"target", c.target}, {"args", c.args}};
}

inline Command command_from_json(const Json& j) {
  if (!j.is_object()) throw CommandError(CommandErrorKind::BadRequest, "command must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw CommandError(CommandErrorKind::BadRequest, "command needs a string 'kind'");
  Command c;
  const auto k = j["kind"].get<std::string>();
  bool found = false;
  for (const auto& [kind, name] : command_names())
    if (k == name) {
      c.kind = kind;
      found = true;
    }
  if (!found) throw CommandError(CommandErrorKind::BadRequest, "unknown command kind '" + k + "'");
  if (j.contains("target")) {
    if (!j["target"].is_string()) throw CommandError(CommandErrorKind::BadRequest, "'target' must be a string");
    c.target = j["target"].get<std::string>();
  }
  if (j.contains("args")) {
    if (!j["args"].is_object()) throw CommandError(CommandErrorKind::BadRequest, "'args' must be an object");
    c.args = j["args"];
  }
  return c;
}

inline Json to_json(const CommandResult& r) {
  Json j{{"seq", r.seq}, {"t_ms", r.t_ms}, {"command", to_json(r.command)}, {"accepted", r.accepted}};
  j["reason"] = r.accepted ? Json(nullptr) : Json(r.reason);
  j["status"] = r.status;
  return j;
}

/// A command applied (or to be applied) at a virtual instant.
struct ScheduledCommand {
  std::int64_t t_ms = 0;
  Command command;

  friend bool operator==(const ScheduledCommand&, const ScheduledCommand&) = default;
};

inline std::string format_script(const std::vector<ScheduledCommand>& script) {
  std::string out;
  for (const auto& s : script) out += Json{{"t_ms", s.t_ms}, {"command", to_json(s.command)}}.dump() + "\n";
  return out;
}

inline std::vector<ScheduledCommand> parse_script(std::istream& in) {
  std::vector<ScheduledCommand> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    auto bad = [&](const std::string& why) {
      return CommandError(CommandErrorKind::BadRequest, "command script line " + std::to_string(n) + ": " + why);
    };
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw bad("not a JSON object");
    if (!j.contains("t_ms") || !j["t_ms"].is_number_integer()) throw bad("needs integer t_ms");
    ScheduledCommand s;
    s.t_ms = j["t_ms"].get<std::int64_t>();
    if (s.t_ms < 0) throw bad("negative t_ms");
    if (!out.empty() && s.t_ms < out.back().t_ms) throw bad("out of time order");
    try {
      s.command = command_from_json(j.contains("command") ? j["command"] : Json());
    } catch (const CommandError& e) {
      throw bad(e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace stl4iot::sim
