#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "stl4iot/sc/model.hpp"

namespace stl4iot::sc {

enum class ComposeErrorKind { UnknownSlot, NameClash, UnroutableEvent };

inline std::string_view to_string(ComposeErrorKind k) {
  switch (k) {
    case ComposeErrorKind::UnknownSlot: return "UnknownSlot";
    case ComposeErrorKind::NameClash: return "NameClash";
    case ComposeErrorKind::UnroutableEvent: return "UnroutableEvent";
  }
  return "?";
}

class ComposeError : public std::runtime_error {
 public:
  ComposeError(ComposeErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ComposeErrorKind kind() const { return kind_; }

 private:
  ComposeErrorKind kind_;
};

namespace detail {

inline void check_route(const StatechartDef& parent, const StatechartDef& child, const EventRoute& r) {
  const EventDecl* ce = child.find_event(r.child_event);
  const EventDecl* pe = parent.find_event(r.parent_event);
  const std::string what = r.child_event + (r.direction == EventRoute::Direction::Up ? " -> " : " <- ") + r.parent_event;
  if (!ce || !pe) throw ComposeError(ComposeErrorKind::UnroutableEvent, what + ": event not declared");
  if (ce->payload != pe->payload) throw ComposeError(ComposeErrorKind::UnroutableEvent, what + ": payload types differ");
  if (r.direction == EventRoute::Direction::Up) {
    if (ce->direction != EventDirection::Out || pe->direction == EventDirection::Internal)
      throw ComposeError(ComposeErrorKind::UnroutableEvent, what + ": up routes take a child out event");
  } else if (ce->direction != EventDirection::In || pe->direction != EventDirection::In) {
    throw ComposeError(ComposeErrorKind::UnroutableEvent, what + ": down routes connect two in events");
  }
}

}  // namespace detail

/// Binds `child` into `slot` of a copy of `parent`.
///
/// A child out event that shares its name with a parent event must be wired
/// explicitly; otherwise the emission would be dropped silently.
inline StatechartDef embed_submachine(const StatechartDef& parent, const std::string& slot,
                                      std::shared_ptr<const StatechartDef> child, std::vector<EventRoute> wiring) {
  StatechartDef out = parent;
  SubmachineSlot* s = nullptr;
  for (auto& candidate : out.slots)
    if (candidate.name == slot) s = &candidate;
  if (!s) throw ComposeError(ComposeErrorKind::UnknownSlot, slot + " in " + parent.name);
  if (!child) throw ComposeError(ComposeErrorKind::UnknownSlot, slot + ": no child definition");
  for (const auto& r : wiring) detail::check_route(parent, *child, r);
  for (const auto& e : child->events) {
    if (e.direction != EventDirection::Out || !parent.find_event(e.name)) continue;
    bool wired = false;
    for (const auto& r : wiring) wired = wired || (r.direction == EventRoute::Direction::Up && r.child_event == e.name);
    if (!wired) throw ComposeError(ComposeErrorKind::NameClash, e.name + " of " + child->name + " in slot " + slot);
  }
  s->child = std::move(child);
  s->wiring = std::move(wiring);
  return out;
}

}  // namespace stl4iot::sc
