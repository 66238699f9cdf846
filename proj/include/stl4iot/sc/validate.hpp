#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "stl4iot/sc/expr.hpp"
#include "stl4iot/sc/model.hpp"

namespace stl4iot::sc {

enum class ViolationKind {
  UnknownStateRef,
  DuplicateInitial,
  MissingInitial,
  UndeclaredEvent,
  TypeMismatch,
  UnboundSlot,
  UnknownVariable,
  DuplicateName,
  InvalidDuration,
  DeepHistoryUnsupported,
  ParseError,
  InvalidTransition,
  UnroutableEvent,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::UnknownStateRef: return "UnknownStateRef";
    case ViolationKind::DuplicateInitial: return "DuplicateInitial";
    case ViolationKind::MissingInitial: return "MissingInitial";
    case ViolationKind::UndeclaredEvent: return "UndeclaredEvent";
    case ViolationKind::TypeMismatch: return "TypeMismatch";
    case ViolationKind::UnboundSlot: return "UnboundSlot";
    case ViolationKind::UnknownVariable: return "UnknownVariable";
    case ViolationKind::DuplicateName: return "DuplicateName";
    case ViolationKind::InvalidDuration: return "InvalidDuration";
    case ViolationKind::DeepHistoryUnsupported: return "DeepHistoryUnsupported";
    case ViolationKind::ParseError: return "ParseError";
    case ViolationKind::InvalidTransition: return "InvalidTransition";
    case ViolationKind::UnroutableEvent: return "UnroutableEvent";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::string path;  // offending state path, reference, or element name
  std::string message;

  std::string describe() const { return std::string(to_string(kind)) + "(" + path + "): " + message; }
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> v) : std::runtime_error(summarize(v)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string s = "invalid statechart definition:";
    for (const auto& x : v) s += "\n  " + x.describe();
    return s;
  }
  std::vector<Violation> violations_;
};

struct CompiledChart;

/// Flattened, index-based form of a validated StatechartDef.
struct CompiledChart {
  struct State {
    std::string name;
    std::string path;
    StateKind kind = StateKind::Basic;
    int parent_region = -1;
    int parent_state = -1;
    int depth = 0;
    std::vector<int> regions;
    std::vector<Action> entry;
    std::vector<Action> exit;
    std::vector<int> timed;  // after-transitions sourced here
  };

  struct RegionInfo {
    std::string name;
    std::string path;
    int owner = -1;  // -1 for top-level regions
    int initial = -1;
    int history = -1;
    std::vector<int> states;
  };

  struct Transition {
    int index = 0;
    int source = -1;
    int target = -1;  // -1: local reaction
    Trigger::Kind trigger = Trigger::Kind::Always;
    int event = -1;
    std::int64_t after_ms = 0;
    ExprPtr after_expr;
    ExprPtr guard;
    std::vector<Action> actions;
    int domain = -1;  // root of the exited subtree; -1 for local reactions
    std::string label;
  };

  struct Route {
    EventRoute::Direction direction;
    int child_event;
    int parent_event;
  };

  struct Slot {
    std::string name;
    std::shared_ptr<const CompiledChart> child;
    std::vector<Route> routes;
  };

  std::shared_ptr<const StatechartDef> source;
  std::string name;
  std::vector<EventDecl> events;
  std::vector<VariableDecl> variables;
  std::vector<Value> initial_values;
  std::vector<State> states;
  std::vector<RegionInfo> regions;
  std::vector<int> root_regions;
  std::vector<Transition> transitions;
  std::vector<Slot> slots;

  std::vector<std::vector<int>> by_event;  // event index -> transitions in document order
  std::vector<int> always;
  std::unordered_map<std::string, int> event_index;
  std::unordered_map<std::string, int> var_index;
  std::unordered_map<std::string, int> state_index;  // full path -> state
  std::unordered_map<std::string, int> slot_index;

  int find_event(std::string_view n) const {
    auto it = event_index.find(std::string(n));
    return it == event_index.end() ? -1 : it->second;
  }
  int find_var(std::string_view n) const {
    auto it = var_index.find(std::string(n));
    return it == var_index.end() ? -1 : it->second;
  }
  int find_slot(std::string_view n) const {
    auto it = slot_index.find(std::string(n));
    return it == slot_index.end() ? -1 : it->second;
  }
  int find_state(std::string_view path) const {
    auto it = state_index.find(std::string(path));
    return it == state_index.end() ? -1 : it->second;
  }

  bool is_ancestor_or_self(int anc, int s) const {
    for (int x = s; x >= 0; x = states[static_cast<std::size_t>(x)].parent_state)
      if (x == anc) return true;
    return false;
  }
};

namespace detail {

class Compiler {
 public:
  explicit Compiler(std::shared_ptr<const StatechartDef> def) : def_(std::move(def)) {}

  std::shared_ptr<const CompiledChart> run(std::vector<Violation>& out) {
    auto c = std::make_shared<CompiledChart>();
    chart_ = c.get();
    c->source = def_;
    c->name = def_->name;
    declarations();
    slots();
    for (const auto& r : def_->root) c->root_regions.push_back(add_region(r, -1, ""));
    if (def_->root.empty()) report(ViolationKind::MissingInitial, def_->name, "statechart has no region");
    state_actions();
    transitions();
    out.insert(out.end(), violations_.begin(), violations_.end());
    return violations_.empty() ? c : nullptr;
  }

 private:
  void report(ViolationKind k, std::string path, std::string msg) {
    violations_.push_back(Violation{k, std::move(path), std::move(msg)});
  }

  void declarations() {
    auto& c = *chart_;
    for (const auto& e : def_->events) {
      if (c.event_index.count(e.name)) {
        report(ViolationKind::DuplicateName, e.name, "event declared twice");
        continue;
      }
      c.event_index[e.name] = static_cast<int>(c.events.size());
      c.events.push_back(e);
    }
    c.by_event.resize(c.events.size());
    for (const auto& v : def_->variables) {
      if (c.var_index.count(v.name)) {
        report(ViolationKind::DuplicateName, v.name, "variable declared twice");
        continue;
      }
      if (v.type == ValueType::None) report(ViolationKind::TypeMismatch, v.name, "variable needs a type");
      Value init = v.initial.is_none() ? Value::default_for(v.type) : v.initial;
      if (!assignable(v.type, init.type()))
        report(ViolationKind::TypeMismatch, v.name,
               "initial value of type " + std::string(to_string(init.type())) + " for " +
                   std::string(to_string(v.type)) + " variable");
      c.var_index[v.name] = static_cast<int>(c.variables.size());
      c.variables.push_back(v);
      c.initial_values.push_back(init.coerced(v.type));
    }
  }

  void slots() {
    auto& c = *chart_;
    for (const auto& s : def_->slots) {
      if (c.slot_index.count(s.name)) {
        report(ViolationKind::DuplicateName, s.name, "slot declared twice");
        continue;
      }
      CompiledChart::Slot cs;
      cs.name = s.name;
      if (!s.child) {
        report(ViolationKind::UnboundSlot, s.name, "slot has no bound statechart");
      } else {
        std::vector<Violation> sub;
        cs.child = Compiler(s.child).run(sub);
        for (auto& v : sub) report(v.kind, s.name + ":" + v.path, v.message);
        if (cs.child) routes(s, cs);
      }
      c.slot_index[s.name] = static_cast<int>(c.slots.size());
      c.slots.push_back(std::move(cs));
    }
  }

  void routes(const SubmachineSlot& s, CompiledChart::Slot& cs) {
    const auto& child = *cs.child;
    for (const auto& r : s.wiring) {
      const int ce = child.find_event(r.child_event);
      const int pe = chart_->find_event(r.parent_event);
      const std::string where = s.name + ":" + r.child_event + "->" + r.parent_event;
      if (ce < 0 || pe < 0) {
        report(ViolationKind::UnroutableEvent, where, "route names an undeclared event");
        continue;
      }
      const auto& cd = child.events[static_cast<std::size_t>(ce)];
      const auto& pd = chart_->events[static_cast<std::size_t>(pe)];
      const bool up = r.direction == EventRoute::Direction::Up;
      const bool dirs_ok = up ? (cd.direction == EventDirection::Out && pd.direction != EventDirection::Internal)
                              : (cd.direction == EventDirection::In && pd.direction == EventDirection::In);
      if (!dirs_ok) {
        report(ViolationKind::UnroutableEvent, where, up ? "up routes connect a child out event to a parent in/out event"
                                                         : "down routes connect parent in events to child in events");
        continue;
      }
      if (cd.payload != pd.payload) {
        report(ViolationKind::TypeMismatch, where, "payload types differ across the route");
        continue;
      }
      cs.routes.push_back({r.direction, ce, pe});
    }
  }

  int add_region(const Region& r, int owner, const std::string& prefix) {
    auto& c = *chart_;
    const int idx = static_cast<int>(c.regions.size());
    CompiledChart::RegionInfo info;
    info.name = r.name;
    info.path = prefix.empty() ? r.name : prefix + "/" + r.name;
    info.owner = owner;
    c.regions.push_back(info);
    std::set<std::string> names;
    int initial = -1;
    for (const auto& s : r.states) {
      if (!names.insert(s.name).second) report(ViolationKind::DuplicateName, info.path + "/" + s.name, "duplicate state name");
      const int si = add_state(s, idx, owner, info.path);
      const auto kind = s.kind;
      auto& reg = c.regions[static_cast<std::size_t>(idx)];
      reg.states.push_back(si);
      if (kind == StateKind::ShallowHistory) {
        if (reg.history >= 0) report(ViolationKind::DuplicateName, info.path, "region has more than one history node");
        reg.history = si;
        if (s.initial) report(ViolationKind::InvalidTransition, info.path + "/" + s.name, "history node cannot be initial");
        continue;
      }
      if (s.initial) {
        if (initial >= 0) report(ViolationKind::DuplicateInitial, info.path, "region has more than one initial state");
        else initial = si;
      }
    }
    if (initial < 0) report(ViolationKind::MissingInitial, info.path, "region has no initial state");
    c.regions[static_cast<std::size_t>(idx)].initial = initial;
    return idx;
  }

  int add_state(const StateNode& s, int region, int parent, const std::string& prefix) {
    auto& c = *chart_;
    const int idx = static_cast<int>(c.states.size());
    CompiledChart::State st;
    st.name = s.name;
    st.path = prefix + "/" + s.name;
    st.kind = s.kind;
    st.parent_region = region;
    st.parent_state = parent;
    st.depth = parent < 0 ? 0 : c.states[static_cast<std::size_t>(parent)].depth + 1;
    if (s.name.empty() || s.name.find('/') != std::string::npos)
      report(ViolationKind::DuplicateName, st.path, "state names must be non-empty and contain no '/'");
    c.states.push_back(st);
    c.state_index[st.path] = idx;
    raw_states_.push_back(&s);

    const std::size_t n = s.regions.size();
    switch (s.kind) {
      case StateKind::Basic:
        if (n != 0) report(ViolationKind::InvalidTransition, st.path, "basic state cannot own regions");
        break;
      case StateKind::Composite:
        if (n != 1) report(ViolationKind::InvalidTransition, st.path, "composite state needs exactly one region");
        break;
      case StateKind::Orthogonal:
        if (n < 2) report(ViolationKind::InvalidTransition, st.path, "orthogonal state needs at least two regions");
        break;
      case StateKind::ShallowHistory:
        if (n != 0 || !s.entry_actions.empty() || !s.exit_actions.empty())
          report(ViolationKind::InvalidTransition, st.path, "history node carries no regions or actions");
        break;
      case StateKind::DeepHistory:
        report(ViolationKind::DeepHistoryUnsupported, st.path, "deep history is not supported");
        break;
    }
    std::set<std::string> rnames;
    for (const auto& r : s.regions) {
      if (!rnames.insert(r.name).second) report(ViolationKind::DuplicateName, st.path + "/" + r.name, "duplicate region name");
      const int ri = add_region(r, idx, st.path);
      c.states[static_cast<std::size_t>(idx)].regions.push_back(ri);
    }
    return idx;
  }

  TypeScope scope(ValueType payload) const {
    TypeScope sc;
    const CompiledChart* c = chart_;
    sc.var = [c](std::string_view n) -> std::optional<std::pair<int, ValueType>> {
      const int i = c->find_var(n);
      if (i < 0) return std::nullopt;
      return std::make_pair(i, c->variables[static_cast<std::size_t>(i)].type);
    };
    sc.slot_var = [c](std::string_view slot, std::string_view v) -> std::optional<std::pair<int, int>> {
      const int si = c->find_slot(slot);
      if (si < 0 || !c->slots[static_cast<std::size_t>(si)].child) return std::nullopt;
      const int vi = c->slots[static_cast<std::size_t>(si)].child->find_var(v);
      if (vi < 0) return std::nullopt;
      return std::make_pair(si, vi);
    };
    sc.slot_var_type = [c](int si, int vi) {
      return c->slots[static_cast<std::size_t>(si)].child->variables[static_cast<std::size_t>(vi)].type;
    };
    sc.payload = payload;
    return sc;
  }

  ExprPtr compile_expr(const std::string& src, ValueType payload, ValueType want, const std::string& where) {
    ExprPtr e;
    try {
      e = parse_expr(src);
    } catch (const sc::ParseError& ex) {
      report(ViolationKind::ParseError, where, "'" + src + "': " + ex.what());
      return nullptr;
    }
    try {
      const ValueType t = resolve(*e, scope(payload));
      if (want != ValueType::None && !assignable(want, t)) {
        report(ViolationKind::TypeMismatch, where,
               "'" + src + "' has type " + std::string(to_string(t)) + ", expected " + std::string(to_string(want)));
        return nullptr;
      }
    } catch (const TypeError& ex) {
      const std::string msg = ex.what();
      const bool unknown = msg.rfind("unknown", 0) == 0;
      report(unknown ? ViolationKind::UnknownVariable : ViolationKind::TypeMismatch, where, "'" + src + "': " + msg);
      return nullptr;
    }
    return e;
  }

  std::optional<Action> compile_action(const std::string& src, ValueType payload, const std::string& where) {
    Action a;
    try {
      a = parse_action(src);
    } catch (const sc::ParseError& ex) {
      report(ViolationKind::ParseError, where, "'" + src + "': " + ex.what());
      return std::nullopt;
    }
    auto& c = *chart_;
    auto check_value = [&](ValueType expected) -> bool {
      if (!a.value) {
        if (expected != ValueType::None) {
          report(ViolationKind::TypeMismatch, where, "'" + src + "': event needs a " + std::string(to_string(expected)) + " payload");
          return false;
        }
        return true;
      }
      if (expected == ValueType::None) {
        report(ViolationKind::TypeMismatch, where, "'" + src + "': event carries no payload");
        return false;
      }
      std::string text = src;  // re-resolve the already parsed value expression
      try {
        const ValueType t = resolve(*a.value, scope(payload));
        if (!assignable(expected, t)) {
          report(ViolationKind::TypeMismatch, where,
                 "'" + text + "': value of type " + std::string(to_string(t)) + ", expected " + std::string(to_string(expected)));
          return false;
        }
      } catch (const TypeError& ex) {
        const std::string msg = ex.what();
        report(msg.rfind("unknown", 0) == 0 ? ViolationKind::UnknownVariable : ViolationKind::TypeMismatch, where,
               "'" + text + "': " + msg);
        return false;
      }
      return true;
    };
    switch (a.kind) {
      case Action::Kind::Assign: {
        a.var_index = c.find_var(a.target);
        if (a.var_index < 0) {
          report(ViolationKind::UnknownVariable, where, "'" + src + "': unknown variable '" + a.target + "'");
          return std::nullopt;
        }
        if (!check_value(c.variables[static_cast<std::size_t>(a.var_index)].type)) return std::nullopt;
        break;
      }
      case Action::Kind::Raise:
      case Action::Kind::Emit: {
        a.event_index = c.find_event(a.target);
        if (a.event_index < 0) {
          report(ViolationKind::UndeclaredEvent, a.target, where + ": '" + src + "': event is not declared");
          return std::nullopt;
        }
        const auto& ev = c.events[static_cast<std::size_t>(a.event_index)];
        const bool ok = a.kind == Action::Kind::Emit ? ev.direction == EventDirection::Out
                                                     : ev.direction != EventDirection::Out;
        if (!ok) {
          report(ViolationKind::UndeclaredEvent, where,
                 "'" + src + "': " + (a.kind == Action::Kind::Emit ? "emit needs an out event" : "raise needs a local event"));
          return std::nullopt;
        }
        if (!check_value(ev.payload)) return std::nullopt;
        break;
      }
      case Action::Kind::Send: {
        a.slot_index = c.find_slot(a.slot);
        if (a.slot_index < 0) {
          report(ViolationKind::UnboundSlot, where, "'" + src + "': unknown slot '" + a.slot + "'");
          return std::nullopt;
        }
        const auto& child = c.slots[static_cast<std::size_t>(a.slot_index)].child;
        if (!child) return std::nullopt;
        a.event_index = child->find_event(a.target);
        if (a.event_index < 0 || child->events[static_cast<std::size_t>(a.event_index)].direction != EventDirection::In) {
          report(ViolationKind::UndeclaredEvent, a.slot + "." + a.target, where + ": '" + src + "': not an in event of " + a.slot);
          return std::nullopt;
        }
        if (!check_value(child->events[static_cast<std::size_t>(a.event_index)].payload)) return std::nullopt;
        break;
      }
    }
    return a;
  }

  std::vector<Action> compile_actions(const std::vector<std::string>& srcs, ValueType payload, const std::string& where) {
    std::vector<Action> out;
    for (const auto& s : srcs)
      if (auto a = compile_action(s, payload, where)) out.push_back(std::move(*a));
    return out;
  }

  void state_actions() {
    auto& c = *chart_;
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      c.states[i].entry = compile_actions(raw_states_[i]->entry_actions, ValueType::None, c.states[i].path);
      c.states[i].exit = compile_actions(raw_states_[i]->exit_actions, ValueType::None, c.states[i].path);
    }
  }

  // Resolves a state reference: a full path, or a '/'-aligned suffix naming exactly one state.
  int lookup(const std::string& ref, const std::string& where) {
    auto& c = *chart_;
    if (int i = c.find_state(ref); i >= 0) return i;
    int found = -1;
    int count = 0;
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      const std::string& p = c.states[i].path;
      if (p.size() > ref.size() && p.compare(p.size() - ref.size(), ref.size(), ref) == 0 &&
          p[p.size() - ref.size() - 1] == '/') {
        found = static_cast<int>(i);
        ++count;
      }
    }
    if (count == 1) return found;
    report(ViolationKind::UnknownStateRef, ref, (count ? "ambiguous state reference in " : "undeclared state in ") + where);
    return -1;
  }

  // Deepest region containing both states, or -1 when they share none.
  int common_region(int a, int b) const {
    const auto& c = *chart_;
    std::vector<int> ra;
    for (int s = a; s >= 0; s = c.states[static_cast<std::size_t>(s)].parent_state)
      ra.push_back(c.states[static_cast<std::size_t>(s)].parent_region);
    for (int s = b; s >= 0; s = c.states[static_cast<std::size_t>(s)].parent_state) {
      const int r = c.states[static_cast<std::size_t>(s)].parent_region;
      if (std::find(ra.begin(), ra.end(), r) != ra.end()) return r;
    }
    return -1;
  }

  void transitions() {
    auto& c = *chart_;
    for (std::size_t i = 0; i < def_->transitions.size(); ++i) {
      const auto& t = def_->transitions[i];
      CompiledChart::Transition ct;
      ct.index = static_cast<int>(i);
      const std::string where = "transition #" + std::to_string(i) + " " + t.source + " -> " + t.target.value_or("(local)");
      ct.label = t.source + " -> " + t.target.value_or("(local)");
      ct.source = lookup(t.source, where);
      if (t.target) ct.target = lookup(*t.target, where);
      ct.trigger = t.trigger.kind;
      ValueType payload = ValueType::None;
      if (t.trigger.kind == Trigger::Kind::Event) {
        ct.event = c.find_event(t.trigger.event);
        if (ct.event < 0) {
          report(ViolationKind::UndeclaredEvent, t.trigger.event, "trigger of " + where);
        } else if (c.events[static_cast<std::size_t>(ct.event)].direction == EventDirection::Out) {
          report(ViolationKind::UndeclaredEvent, t.trigger.event, "out events cannot trigger transitions (" + where + ")");
        } else {
          payload = c.events[static_cast<std::size_t>(ct.event)].payload;
        }
      } else if (t.trigger.kind == Trigger::Kind::After) {
        if (!t.trigger.after_expr.empty()) {
          ct.after_expr = compile_expr(t.trigger.after_expr, ValueType::None, ValueType::Int, where);
        } else if (t.trigger.after_ms <= 0) {
          report(ViolationKind::InvalidDuration, where, "after-duration must be positive");
        }
        ct.after_ms = t.trigger.after_ms;
      }
      if (!t.guard.empty()) ct.guard = compile_expr(t.guard, payload, ValueType::Bool, where);
      ct.actions = compile_actions(t.actions, payload, where);
      if (ct.source < 0 || (t.target && ct.target < 0)) continue;

      const auto& src = c.states[static_cast<std::size_t>(ct.source)];
      if (src.kind == StateKind::ShallowHistory) {
        report(ViolationKind::InvalidTransition, src.path, "history nodes cannot be transition sources");
        continue;
      }
      if (ct.target >= 0) {
        if (ct.source == ct.target) {
          ct.domain = ct.source;
        } else {
          const int r = common_region(ct.source, ct.target);
          if (r < 0) {
            report(ViolationKind::InvalidTransition, where, "source and target lie in different top-level regions");
            continue;
          }
          int d = ct.source;
          while (c.states[static_cast<std::size_t>(d)].parent_region != r) d = c.states[static_cast<std::size_t>(d)].parent_state;
          ct.domain = d;
        }
      }
      if (ct.trigger == Trigger::Kind::Event && ct.event >= 0) c.by_event[static_cast<std::size_t>(ct.event)].push_back(ct.index);
      if (ct.trigger == Trigger::Kind::Always) c.always.push_back(ct.index);
      if (ct.trigger == Trigger::Kind::After) c.states[static_cast<std::size_t>(ct.source)].timed.push_back(ct.index);
      c.transitions.push_back(std::move(ct));
    }
    // Keep transitions addressable by their document index even when some failed.
    if (c.transitions.size() != def_->transitions.size()) c.transitions.clear();
  }

  std::shared_ptr<const StatechartDef> def_;
  CompiledChart* chart_ = nullptr;
  std::vector<const StateNode*> raw_states_;
  std::vector<Violation> violations_;
};

}  // namespace detail

/// Every violation of `def`; empty when the definition is valid.
inline std::vector<Violation> check_definition(const StatechartDef& def) {
  std::vector<Violation> out;
  detail::Compiler(std::make_shared<const StatechartDef>(def)).run(out);
  return out;
}

/// Validates and compiles `def`. Throws ValidationError listing every violation.
inline std::shared_ptr<const CompiledChart> validate_definition(const StatechartDef& def) {
  std::vector<Violation> out;
  auto chart = detail::Compiler(std::make_shared<const StatechartDef>(def)).run(out);
  if (!chart) throw ValidationError(std::move(out));
  return chart;
}

}  // namespace stl4iot::sc
