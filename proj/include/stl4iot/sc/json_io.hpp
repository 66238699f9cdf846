#pragma once

// Statechart definitions as JSON. The layout mirrors StatechartDef field by
// field; docs/statechart.schema.json describes it.

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "stl4iot/sc/model.hpp"

namespace stl4iot::sc {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline std::string_view direction_name(EventDirection d) {
  switch (d) {
    case EventDirection::In: return "in";
    case EventDirection::Out: return "out";
    case EventDirection::Internal: return "internal";
  }
  return "in";
}

inline std::string_view kind_name(StateKind k) {
  switch (k) {
    case StateKind::Basic: return "basic";
    case StateKind::Composite: return "composite";
    case StateKind::Orthogonal: return "orthogonal";
    case StateKind::ShallowHistory: return "shallow-history";
    case StateKind::DeepHistory: return "deep-history";
  }
  return "basic";
}

inline json value_to_json(const Value& v) {
  switch (v.type()) {
    case ValueType::None: return nullptr;
    case ValueType::Bool: return v.as_bool();
    case ValueType::Int: return v.as_int();
    case ValueType::Real: return v.as_real();
    case ValueType::String: return v.as_string();
  }
  return nullptr;
}

inline Value value_from_json(const json& j, ValueType t, const std::string& where) {
  if (j.is_null()) return {};
  switch (t) {
    case ValueType::Bool:
      if (j.is_boolean()) return j.get<bool>();
      break;
    case ValueType::Int:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      break;
    case ValueType::Real:
      if (j.is_number()) return j.get<double>();
      break;
    case ValueType::String:
      if (j.is_string()) return j.get<std::string>();
      break;
    case ValueType::None: break;
  }
  throw FormatError(where + ": initial value does not match type " + std::string(to_string(t)));
}

inline json strings(const std::vector<std::string>& v) { return json(v); }

inline json region_to_json(const Region& r);

inline json state_to_json(const StateNode& s) {
  json j;
  j["name"] = s.name;
  j["kind"] = kind_name(s.kind);
  j["initial"] = s.initial;
  j["regions"] = json::array();
  for (const auto& r : s.regions) j["regions"].push_back(region_to_json(r));
  j["entry_actions"] = strings(s.entry_actions);
  j["exit_actions"] = strings(s.exit_actions);
  return j;
}

inline json region_to_json(const Region& r) {
  json j;
  j["name"] = r.name;
  j["states"] = json::array();
  for (const auto& s : r.states) j["states"].push_back(state_to_json(s));
  return j;
}

inline json trigger_to_json(const Trigger& t) {
  json j;
  switch (t.kind) {
    case Trigger::Kind::Event:
      j["kind"] = "event";
      j["event"] = t.event;
      break;
    case Trigger::Kind::After:
      j["kind"] = "after";
      if (t.after_expr.empty()) j["after_ms"] = t.after_ms;
      else j["after_expr"] = t.after_expr;
      break;
    case Trigger::Kind::Always: j["kind"] = "always"; break;
  }
  return j;
}

// Accessors that turn nlohmann's type errors into messages naming the field.
inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::string str(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw FormatError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::string opt_str(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return str(j, key, where);
}

inline std::vector<std::string> opt_strings(const json& j, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& a = j.at(key);
  if (!a.is_array()) throw FormatError(where + ": field '" + key + "' must be an array");
  for (const auto& e : a) {
    if (!e.is_string()) throw FormatError(where + ": entries of '" + key + "' must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline const json& opt_array(const json& j, const char* key, const std::string& where) {
  static const json empty = json::array();
  if (!j.contains(key)) return empty;
  const auto& a = j.at(key);
  if (!a.is_array()) throw FormatError(where + ": field '" + key + "' must be an array");
  return a;
}

inline Region region_from_json(const json& j, const std::string& where);

inline StateNode state_from_json(const json& j, const std::string& where) {
  StateNode s;
  s.name = str(j, "name", where);
  const std::string here = where + "/" + s.name;
  const std::string kind = j.contains("kind") ? str(j, "kind", here) : "basic";
  if (kind == "basic") s.kind = StateKind::Basic;
  else if (kind == "composite") s.kind = StateKind::Composite;
  else if (kind == "orthogonal") s.kind = StateKind::Orthogonal;
  else if (kind == "shallow-history") s.kind = StateKind::ShallowHistory;
  else if (kind == "deep-history") s.kind = StateKind::DeepHistory;
  else throw FormatError(here + ": unknown state kind '" + kind + "'");
  if (j.contains("initial")) {
    if (!j.at("initial").is_boolean()) throw FormatError(here + ": 'initial' must be a boolean");
    s.initial = j.at("initial").get<bool>();
  }
  for (const auto& r : opt_array(j, "regions", here)) s.regions.push_back(region_from_json(r, here));
  s.entry_actions = opt_strings(j, "entry_actions", here);
  s.exit_actions = opt_strings(j, "exit_actions", here);
  return s;
}

inline Region region_from_json(const json& j, const std::string& where) {
  Region r;
  r.name = str(j, "name", where);
  for (const auto& s : opt_array(j, "states", where + "/" + r.name)) r.states.push_back(state_from_json(s, where + "/" + r.name));
  return r;
}

inline Trigger trigger_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": trigger must be an object");
  const std::string kind = str(j, "kind", where);
  Trigger t;
  if (kind == "event") {
    t.kind = Trigger::Kind::Event;
    t.event = str(j, "event", where);
  } else if (kind == "after") {
    t.kind = Trigger::Kind::After;
    if (j.contains("after_expr")) {
      t.after_expr = str(j, "after_expr", where);
    } else {
      const auto& ms = field(j, "after_ms", where);
      if (!ms.is_number_integer()) throw FormatError(where + ": 'after_ms' must be an integer");
      t.after_ms = ms.get<std::int64_t>();
    }
  } else if (kind == "always") {
    t.kind = Trigger::Kind::Always;
  } else {
    throw FormatError(where + ": unknown trigger kind '" + kind + "'");
  }
  return t;
}

inline ValueType type_field(const json& j, const char* key, const std::string& where, bool required) {
  if (!j.contains(key)) {
    if (required) throw FormatError(where + ": missing field '" + key + "'");
    return ValueType::None;
  }
  const auto t = parse_value_type(str(j, key, where));
  if (!t) throw FormatError(where + ": unknown type '" + j.at(key).get<std::string>() + "'");
  return *t;
}

}  // namespace detail

inline nlohmann::json to_json(const StatechartDef& d) {
  using detail::json;
  json j;
  j["name"] = d.name;
  j["events"] = json::array();
  for (const auto& e : d.events)
    j["events"].push_back({{"name", e.name}, {"payload", to_string(e.payload)}, {"direction", detail::direction_name(e.direction)}});
  j["variables"] = json::array();
  for (const auto& v : d.variables)
    j["variables"].push_back({{"name", v.name}, {"type", to_string(v.type)}, {"initial", detail::value_to_json(v.initial)}});
  j["root"] = json::array();
  for (const auto& r : d.root) j["root"].push_back(detail::region_to_json(r));
  j["transitions"] = json::array();
  for (const auto& t : d.transitions) {
    json tj;
    tj["source"] = t.source;
    tj["target"] = t.target ? json(*t.target) : json(nullptr);
    tj["trigger"] = detail::trigger_to_json(t.trigger);
    tj["guard"] = t.guard;
    tj["actions"] = detail::strings(t.actions);
    j["transitions"].push_back(std::move(tj));
  }
  j["slots"] = json::array();
  for (const auto& s : d.slots) {
    json sj;
    sj["name"] = s.name;
    sj["child"] = s.child ? to_json(*s.child) : json(nullptr);
    sj["wiring"] = json::array();
    for (const auto& r : s.wiring)
      sj["wiring"].push_back({{"direction", r.direction == EventRoute::Direction::Up ? "up" : "down"},
                              {"child_event", r.child_event},
                              {"parent_event", r.parent_event}});
    j["slots"].push_back(std::move(sj));
  }
  return j;
}

inline StatechartDef from_json(const nlohmann::json& j) {
  using namespace detail;
  StatechartDef d;
  d.name = str(j, "name", "statechart");
  const std::string where = d.name;
  for (const auto& e : opt_array(j, "events", where)) {
    EventDecl ev;
    ev.name = str(e, "name", where + " event");
    ev.payload = type_field(e, "payload", where + " event " + ev.name, false);
    const std::string dir = e.contains("direction") ? str(e, "direction", where) : "in";
    if (dir == "in") ev.direction = EventDirection::In;
    else if (dir == "out") ev.direction = EventDirection::Out;
    else if (dir == "internal") ev.direction = EventDirection::Internal;
    else throw FormatError(where + " event " + ev.name + ": unknown direction '" + dir + "'");
    d.events.push_back(std::move(ev));
  }
  for (const auto& v : opt_array(j, "variables", where)) {
    VariableDecl var;
    var.name = str(v, "name", where + " variable");
    var.type = type_field(v, "type", where + " variable " + var.name, true);
    if (v.contains("initial")) var.initial = value_from_json(v.at("initial"), var.type, where + " variable " + var.name);
    d.variables.push_back(std::move(var));
  }
  for (const auto& r : opt_array(j, "root", where)) d.root.push_back(region_from_json(r, ""));
  std::size_t i = 0;
  for (const auto& t : opt_array(j, "transitions", where)) {
    const std::string tw = where + " transition #" + std::to_string(i++);
    TransitionDef td;
    td.source = str(t, "source", tw);
    if (t.contains("target") && !t.at("target").is_null()) td.target = str(t, "target", tw);
    td.trigger = trigger_from_json(field(t, "trigger", tw), tw);
    td.guard = opt_str(t, "guard", tw);
    td.actions = opt_strings(t, "actions", tw);
    d.transitions.push_back(std::move(td));
  }
  for (const auto& s : opt_array(j, "slots", where)) {
    SubmachineSlot slot;
    slot.name = str(s, "name", where + " slot");
    if (s.contains("child") && !s.at("child").is_null())
      slot.child = std::make_shared<const StatechartDef>(from_json(s.at("child")));
    for (const auto& r : opt_array(s, "wiring", where + " slot " + slot.name)) {
      EventRoute er;
      const std::string rw = where + " slot " + slot.name + " route";
      const std::string dir = str(r, "direction", rw);
      if (dir == "up") er.direction = EventRoute::Direction::Up;
      else if (dir == "down") er.direction = EventRoute::Direction::Down;
      else throw FormatError(rw + ": unknown direction '" + dir + "'");
      er.child_event = str(r, "child_event", rw);
      er.parent_event = str(r, "parent_event", rw);
      slot.wiring.push_back(std::move(er));
    }
    d.slots.push_back(std::move(slot));
  }
  return d;
}

inline std::string dump_definition(const StatechartDef& d) { return to_json(d).dump(2) + "\n"; }

inline StatechartDef parse_definition(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

inline StatechartDef load_definition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_definition(ss.str());
}

}  // namespace stl4iot::sc
