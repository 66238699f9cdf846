#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stl4iot/sc/value.hpp"

namespace stl4iot::sc {

/// `In` events are accepted from outside, `Out` events are emitted to the
/// parent machine, `Internal` events are raised and consumed locally.
enum class EventDirection { In, Out, Internal };

struct EventDecl {
  std::string name;
  ValueType payload = ValueType::None;
  EventDirection direction = EventDirection::In;
};

struct VariableDecl {
  std::string name;
  ValueType type = ValueType::Bool;
  Value initial;  // none means the type's default
};

enum class StateKind { Basic, Composite, Orthogonal, ShallowHistory, DeepHistory };

struct Region;

struct StateNode {
  std::string name;
  StateKind kind = StateKind::Basic;
  bool initial = false;
  std::vector<Region> regions;
  std::vector<std::string> entry_actions;
  std::vector<std::string> exit_actions;
};

struct Region {
  std::string name;
  std::vector<StateNode> states;
};

struct Trigger {
  enum class Kind { Event, After, Always };
  Kind kind = Kind::Always;
  std::string event;
  /// Either a constant duration or an int expression evaluated on state entry.
  std::int64_t after_ms = 0;
  std::string after_expr;
};

/// A transition without target is a local reaction: its actions run without
/// leaving the source state.
struct TransitionDef {
  std::string source;
  std::optional<std::string> target;
  Trigger trigger;
  std::string guard;
  std::vector<std::string> actions;
};

/// Up routes deliver a child's out event to the parent under `parent_event`
/// (passing it through when that event is itself an out event). Down routes
/// forward a parent in event to the child once the parent has processed it.
struct EventRoute {
  enum class Direction { Up, Down };
  Direction direction = Direction::Up;
  std::string child_event;
  std::string parent_event;
};

struct StatechartDef;

struct SubmachineSlot {
  std::string name;
  std::shared_ptr<const StatechartDef> child;  // null until bound
  std::vector<EventRoute> wiring;
};

struct StatechartDef {
  std::string name;
  std::vector<EventDecl> events;
  std::vector<VariableDecl> variables;
  std::vector<Region> root;
  std::vector<TransitionDef> transitions;
  std::vector<SubmachineSlot> slots;

  const EventDecl* find_event(std::string_view n) const {
    for (const auto& e : events)
      if (e.name == n) return &e;
    return nullptr;
  }
  const VariableDecl* find_variable(std::string_view n) const {
    for (const auto& v : variables)
      if (v.name == n) return &v;
    return nullptr;
  }
  const SubmachineSlot* find_slot(std::string_view n) const {
    for (const auto& s : slots)
      if (s.name == n) return &s;
    return nullptr;
  }
};

// Terse constructors used by the template builders.
namespace build {

inline StateNode basic(std::string name, bool initial = false, std::vector<std::string> entry = {},
                       std::vector<std::string> exit = {}) {
  StateNode s;
  s.name = std::move(name);
  s.initial = initial;
  s.entry_actions = std::move(entry);
  s.exit_actions = std::move(exit);
  return s;
}

inline StateNode composite(std::string name, Region r, bool initial = false, std::vector<std::string> entry = {},
                           std::vector<std::string> exit = {}) {
  StateNode s = basic(std::move(name), initial, std::move(entry), std::move(exit));
  s.kind = StateKind::Composite;
  s.regions.push_back(std::move(r));
  return s;
}

inline StateNode orthogonal(std::string name, std::vector<Region> rs, bool initial = false,
                            std::vector<std::string> entry = {}, std::vector<std::string> exit = {}) {
  StateNode s = basic(std::move(name), initial, std::move(entry), std::move(exit));
  s.kind = StateKind::Orthogonal;
  s.regions = std::move(rs);
  return s;
}

inline StateNode history(std::string name = "H") {
  StateNode s;
  s.name = std::move(name);
  s.kind = StateKind::ShallowHistory;
  return s;
}

inline Region region(std::string name, std::vector<StateNode> states) {
  return Region{std::move(name), std::move(states)};
}

inline Trigger on(std::string event) {
  Trigger t;
  t.kind = Trigger::Kind::Event;
  t.event = std::move(event);
  return t;
}

inline Trigger after(std::int64_t ms) {
  Trigger t;
  t.kind = Trigger::Kind::After;
  t.after_ms = ms;
  return t;
}

inline Trigger after(std::string expr) {
  Trigger t;
  t.kind = Trigger::Kind::After;
  t.after_expr = std::move(expr);
  return t;
}

inline Trigger always() { return Trigger{}; }

inline TransitionDef tr(std::string source, std::string target, Trigger trig, std::string guard = {},
                        std::vector<std::string> actions = {}) {
  return TransitionDef{std::move(source), std::move(target), std::move(trig), std::move(guard), std::move(actions)};
}

inline TransitionDef local(std::string source, Trigger trig, std::string guard = {},
                           std::vector<std::string> actions = {}) {
  return TransitionDef{std::move(source), std::nullopt, std::move(trig), std::move(guard), std::move(actions)};
}

inline EventDecl in(std::string name, ValueType payload = ValueType::None) {
  return EventDecl{std::move(name), payload, EventDirection::In};
}
inline EventDecl out(std::string name, ValueType payload = ValueType::None) {
  return EventDecl{std::move(name), payload, EventDirection::Out};
}
inline EventDecl internal(std::string name, ValueType payload = ValueType::None) {
  return EventDecl{std::move(name), payload, EventDirection::Internal};
}

inline VariableDecl var(std::string name, ValueType type, Value initial = {}) {
  return VariableDecl{std::move(name), type, std::move(initial)};
}

/// Adds `e` unless an event of the same name exists already.
inline void declare(StatechartDef& def, EventDecl e) {
  if (!def.find_event(e.name)) def.events.push_back(std::move(e));
}
inline void declare(StatechartDef& def, VariableDecl v) {
  if (!def.find_variable(v.name)) def.variables.push_back(std::move(v));
}

}  // namespace build

}  // namespace stl4iot::sc
