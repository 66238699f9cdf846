#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stl4iot/sc/validate.hpp"

namespace stl4iot::sc {

/// Micro-steps allowed per macro-step, and delivery rounds per cascade.
inline constexpr int kMicroStepBudget = 10'000;

struct Event {
  std::string name;
  Value payload;
};

enum class EngineErrorKind {
  AlreadyEntered,
  NotEntered,
  UndeclaredEvent,
  PayloadMismatch,
  LivelockGuard,
  UnknownVariable,
  UnknownMachine,
  NegativeDelta,
};

inline std::string_view to_string(EngineErrorKind k) {
  switch (k) {
    case EngineErrorKind::AlreadyEntered: return "AlreadyEntered";
    case EngineErrorKind::NotEntered: return "NotEntered";
    case EngineErrorKind::UndeclaredEvent: return "UndeclaredEvent";
    case EngineErrorKind::PayloadMismatch: return "PayloadMismatch";
    case EngineErrorKind::LivelockGuard: return "LivelockGuard";
    case EngineErrorKind::UnknownVariable: return "UnknownVariable";
    case EngineErrorKind::UnknownMachine: return "UnknownMachine";
    case EngineErrorKind::NegativeDelta: return "NegativeDelta";
  }
  return "?";
}

class EngineError : public std::runtime_error {
 public:
  EngineError(EngineErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  EngineErrorKind kind() const { return kind_; }

 private:
  EngineErrorKind kind_;
};

struct FiredTransition {
  std::string machine;  // "" for the root instance, "slot/slot" below it
  int transition = -1;  // document index within that machine's definition
  std::string source;
  std::string target;  // empty for local reactions
  std::int64_t t_ms = 0;
  std::uint64_t micro_step = 0;

  friend bool operator==(const FiredTransition&, const FiredTransition&) = default;
};

struct RaisedEvent {
  std::string machine;
  std::string event;
  Value payload;
  std::int64_t t_ms = 0;
  std::uint64_t micro_step = 0;

  friend bool operator==(const RaisedEvent&, const RaisedEvent&) = default;
};

/// A cross-machine event: `send` toward a slot or `emit` toward the parent.
struct Emission {
  enum class Kind { Send, Emit };
  Kind kind = Kind::Emit;
  std::string from;
  std::string to;  // receiving machine path; "^" when leaving the root
  std::string event;
  Value payload;
  std::int64_t t_ms = 0;
  bool delivered = true;  // false for emits without a route

  friend bool operator==(const Emission&, const Emission&) = default;
};

struct StepReport {
  std::vector<FiredTransition> fired;
  std::vector<RaisedEvent> raised;
  std::vector<Emission> emitted;
  std::set<std::string> config_after;

  void append(StepReport&& o) {
    fired.insert(fired.end(), o.fired.begin(), o.fired.end());
    raised.insert(raised.end(), o.raised.begin(), o.raised.end());
    emitted.insert(emitted.end(), o.emitted.begin(), o.emitted.end());
    config_after = std::move(o.config_after);
  }
};

/// A running statechart together with the instances bound to its slots.
///
/// Operations are invoked on the root of a composition tree; nested machines
/// are addressed by path ("tv", "lights/lights_1/base"). Events crossing a
/// machine boundary are queued and delivered between macro-steps, parents
/// before children in slot order.
class MachineInstance {
 public:
  explicit MachineInstance(std::shared_ptr<const CompiledChart> chart)
      : MachineInstance(std::move(chart), nullptr, "", -1) {}

  MachineInstance(const MachineInstance&) = delete;
  MachineInstance& operator=(const MachineInstance&) = delete;

  const CompiledChart& chart() const { return *chart_; }
  const std::string& path() const { return path_; }
  bool entered() const { return entered_; }
  std::int64_t now() const { return now_; }

  StepReport enter() {
    if (entered_) throw EngineError(EngineErrorKind::AlreadyEntered, describe());
    StepReport rep;
    enter_node(rep);
    cascade(rep);
    rep.config_after = active_configuration();
    return rep;
  }

  StepReport exit() {
    require_entered();
    exit_node();
    StepReport rep;
    rep.config_after = active_configuration();
    return rep;
  }

  StepReport dispatch(const Event& ev) { return dispatch_to("", ev); }

  StepReport dispatch_to(std::string_view machine, const Event& ev) {
    require_entered();
    MachineInstance& target = resolve(machine);
    target.queue_.push_back(target.checked_event(ev));
    StepReport rep;
    cascade(rep);
    rep.config_after = active_configuration();
    return rep;
  }

  /// Advances virtual time, running a macro-step cascade at every instant a timer falls due.
  StepReport advance_time(std::int64_t delta) {
    require_entered();
    if (delta < 0) throw EngineError(EngineErrorKind::NegativeDelta, describe());
    const std::int64_t target = now_ + delta;
    StepReport rep;
    for (;;) {
      const auto due = next_due();
      if (!due || *due > target) break;
      set_time(*due);
      run_due_timers(rep);
      cascade(rep);
    }
    set_time(target);
    rep.config_after = active_configuration();
    return rep;
  }

  /// Earliest pending timer strictly after now, across the whole tree.
  std::optional<std::int64_t> next_due() const {
    std::optional<std::int64_t> best;
    for_each_node([&](const MachineInstance& n) {
      for (std::size_t i = 0; i < n.due_.size(); ++i) {
        const std::int64_t d = n.due_[i];
        if (d > n.now_ && (!best || d < *best)) best = d;
      }
    });
    return best;
  }

  /// Sets a variable and runs a macro-step so guards can react.
  StepReport inject(std::string_view name, Value value) { return inject_at("", name, std::move(value)); }

  StepReport inject_at(std::string_view machine, std::string_view name, Value value) {
    require_entered();
    MachineInstance& node = resolve(machine);
    const int vi = node.chart_->find_var(name);
    if (vi < 0) throw EngineError(EngineErrorKind::UnknownVariable, std::string(name) + " in " + node.describe());
    const auto type = node.chart_->variables[static_cast<std::size_t>(vi)].type;
    if (!assignable(type, value.type()))
      throw EngineError(EngineErrorKind::PayloadMismatch, std::string(name) + " expects " + std::string(to_string(type)));
    node.vars_[static_cast<std::size_t>(vi)] = value.coerced(type);
    StepReport rep;
    node.macro_step(nullptr, rep, false);
    cascade(rep);
    rep.config_after = active_configuration();
    return rep;
  }

  const Value& read_var(std::string_view name) const {
    const int vi = chart_->find_var(name);
    if (vi < 0) throw EngineError(EngineErrorKind::UnknownVariable, std::string(name) + " in " + describe());
    return vars_[static_cast<std::size_t>(vi)];
  }

  bool has_var(std::string_view name) const { return chart_->find_var(name) >= 0; }

  /// Fully-qualified active state paths of this machine and everything below it.
  std::set<std::string> active_configuration() const {
    std::set<std::string> out;
    for_each_node([&](const MachineInstance& n) {
      const std::string prefix = n.path_.size() > path_.size() ? n.path_.substr(path_.empty() ? 0 : path_.size() + 1) + "/" : "";
      for (std::size_t i = 0; i < n.active_.size(); ++i)
        if (n.active_[i]) out.insert(prefix + n.chart_->states[i].path);
    });
    return out;
  }

  /// Active state paths of this machine only.
  std::vector<std::string> local_configuration() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < active_.size(); ++i)
      if (active_[i]) out.push_back(chart_->states[i].path);
    return out;
  }

  bool is_active(std::string_view state_path) const {
    const int s = chart_->find_state(state_path);
    if (s >= 0) return active_[static_cast<std::size_t>(s)] != 0;
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const std::string& p = chart_->states[i].path;
      if (active_[i] && p.size() > state_path.size() && p.compare(p.size() - state_path.size(), state_path.size(), state_path) == 0 &&
          p[p.size() - state_path.size() - 1] == '/')
        return true;
    }
    return false;
  }

  const MachineInstance* child(std::string_view slot) const {
    const int si = chart_->find_slot(slot);
    if (si < 0 || children_.empty()) return nullptr;
    return children_[static_cast<std::size_t>(si)].get();
  }

  const MachineInstance* find(std::string_view machine) const {
    return const_cast<MachineInstance*>(this)->find_mut(machine);
  }

  std::vector<const MachineInstance*> children() const {
    std::vector<const MachineInstance*> out;
    for (const auto& c : children_) out.push_back(c.get());
    return out;
  }

  /// Configuration well-formedness problems; empty when the instance is consistent.
  std::vector<std::string> check_well_formed() const {
    std::vector<std::string> problems;
    for_each_node([&](const MachineInstance& n) { n.check_local(problems); });
    return problems;
  }

 private:
  struct Outgoing {
    Emission::Kind kind;
    int slot;
    std::string event;
    Value payload;
  };

  MachineInstance(std::shared_ptr<const CompiledChart> chart, MachineInstance* parent, std::string path, int slot)
      : chart_(std::move(chart)), parent_(parent), path_(std::move(path)), slot_in_parent_(slot) {
    reset_storage();
  }

  MachineInstance& root() { return parent_ ? parent_->root() : *this; }

  std::string describe() const {
    return "machine '" + (path_.empty() ? chart_->name : path_) + "' at t=" + std::to_string(now_);
  }

  void require_entered() const {
    if (!entered_) throw EngineError(EngineErrorKind::NotEntered, describe());
  }

  void reset_storage() {
    active_.assign(chart_->states.size(), 0);
    due_.assign(chart_->transitions.size(), -1);
    history_.assign(chart_->regions.size(), -1);
    vars_ = chart_->initial_values;
  }

  template <class F>
  void for_each_node(F&& f) const {
    f(*this);
    for (const auto& c : children_) c->for_each_node(f);
  }

  template <class F>
  void for_each_node_mut(F&& f) {
    f(*this);
    for (auto& c : children_) c->for_each_node_mut(f);
  }

  MachineInstance* find_mut(std::string_view machine) {
    if (machine.empty()) return this;
    const auto slash = machine.find('/');
    const auto head = machine.substr(0, slash);
    const int si = chart_->find_slot(head);
    if (si < 0 || children_.empty()) return nullptr;
    auto* c = children_[static_cast<std::size_t>(si)].get();
    return slash == std::string_view::npos ? c : c->find_mut(machine.substr(slash + 1));
  }

  MachineInstance& resolve(std::string_view machine) {
    auto* n = find_mut(machine);
    if (!n) throw EngineError(EngineErrorKind::UnknownMachine, std::string(machine) + " below " + describe());
    return *n;
  }

  Event checked_event(const Event& ev) const {
    const int ei = chart_->find_event(ev.name);
    if (ei < 0 || chart_->events[static_cast<std::size_t>(ei)].direction == EventDirection::Out)
      throw EngineError(EngineErrorKind::UndeclaredEvent, ev.name + " for " + describe());
    const auto want = chart_->events[static_cast<std::size_t>(ei)].payload;
    if (!(want == ValueType::None ? ev.payload.is_none() : assignable(want, ev.payload.type())))
      throw EngineError(EngineErrorKind::PayloadMismatch, ev.name + " expects " + std::string(to_string(want)));
    return Event{ev.name, ev.payload.coerced(want)};
  }

  void set_time(std::int64_t t) {
    for_each_node_mut([t](MachineInstance& n) { n.now_ = t; });
  }

  // ---- composition -------------------------------------------------------

  void enter_node(StepReport& rep) {
    reset_storage();
    queue_.clear();
    children_.clear();
    for (std::size_t i = 0; i < chart_->slots.size(); ++i) {
      const auto& s = chart_->slots[i];
      children_.push_back(std::unique_ptr<MachineInstance>(
          new MachineInstance(s.child, this, path_.empty() ? s.name : path_ + "/" + s.name, static_cast<int>(i))));
      children_.back()->now_ = now_;
    }
    entered_ = true;
    macro_step(nullptr, rep, true);
    for (auto& c : children_) c->enter_node(rep);
  }

  // Leaving the whole machine: exit actions run, but nothing they send is delivered.
  void exit_node() {
    std::vector<Event> next;
    std::vector<Outgoing> out;
    StepReport scratch;
    for (int r : chart_->root_regions) exit_region(r, next, out, scratch, 0);
    for (auto& c : children_) c->exit_node();
    children_.clear();
    queue_.clear();
    entered_ = false;
  }

  void cascade(StepReport& rep) {
    MachineInstance& top = root();
    for (int round = 0;; ++round) {
      if (round > kMicroStepBudget)
        throw EngineError(EngineErrorKind::LivelockGuard, "delivery cascade did not settle at " + describe());
      bool any = false;
      top.for_each_node_mut([&](MachineInstance& n) {
        while (!n.queue_.empty()) {
          Event ev = std::move(n.queue_.front());
          n.queue_.pop_front();
          n.macro_step(&ev, rep, false);
          n.forward_down(ev);
          any = true;
        }
      });
      if (!any) break;
    }
  }

  void run_due_timers(StepReport& rep) {
    root().for_each_node_mut([&](MachineInstance& n) {
      bool due_now = false;
      for (std::size_t i = 0; i < n.due_.size() && !due_now; ++i) due_now = n.due_[i] == n.now_;
      if (due_now) n.macro_step(nullptr, rep, false);
    });
  }

  void forward_down(const Event& ev) {
    const int pe = chart_->find_event(ev.name);
    for (std::size_t si = 0; si < chart_->slots.size(); ++si)
      for (const auto& r : chart_->slots[si].routes)
        if (r.direction == EventRoute::Direction::Down && r.parent_event == pe)
          children_[si]->queue_.push_back(
              Event{chart_->slots[si].child->events[static_cast<std::size_t>(r.child_event)].name, ev.payload});
  }

  void route(std::vector<Outgoing>& out, StepReport& rep) {
    for (auto& o : out) {
      if (o.kind == Emission::Kind::Send) {
        auto& c = *children_[static_cast<std::size_t>(o.slot)];
        rep.emitted.push_back({Emission::Kind::Send, path_, c.path_, o.event, o.payload, now_, true});
        c.queue_.push_back(Event{o.event, o.payload});
      } else {
        emit_up(o.event, o.payload, rep);
      }
    }
    out.clear();
  }

  void emit_up(const std::string& event, const Value& payload, StepReport& rep) {
    if (!parent_) {
      rep.emitted.push_back({Emission::Kind::Emit, path_, "^", event, payload, now_, false});
      return;
    }
    const auto& slot = parent_->chart_->slots[static_cast<std::size_t>(slot_in_parent_)];
    const int ce = chart_->find_event(event);
    bool routed = false;
    for (const auto& r : slot.routes) {
      if (r.direction != EventRoute::Direction::Up || r.child_event != ce) continue;
      routed = true;
      const auto& pd = parent_->chart_->events[static_cast<std::size_t>(r.parent_event)];
      rep.emitted.push_back({Emission::Kind::Emit, path_, parent_->path_, event, payload, now_, true});
      if (pd.direction == EventDirection::Out) parent_->emit_up(pd.name, payload, rep);
      else parent_->queue_.push_back(Event{pd.name, payload});
    }
    if (!routed) rep.emitted.push_back({Emission::Kind::Emit, path_, parent_->path_, event, payload, now_, false});
  }

  // ---- macro / micro steps -----------------------------------------------

  struct Candidate {
    int transition;
    const Value* payload;
  };

  EvalScope scope(const Value* payload) const {
    EvalScope s;
    s.vars = &vars_;
    s.payload = payload;
    s.now = now_;
    s.slot_var = [this](int slot, int var) -> const Value& {
      return children_[static_cast<std::size_t>(slot)]->vars_[static_cast<std::size_t>(var)];
    };
    return s;
  }

  bool guard_holds(const CompiledChart::Transition& t, const Value* payload) const {
    return !t.guard || eval(*t.guard, scope(payload)).as_bool();
  }

  void macro_step(const Event* external, StepReport& rep, bool initial) {
    std::vector<Event> present;
    std::vector<Event> next;
    std::vector<Outgoing> out;
    auto& counter = root().micro_counter_;
    if (initial) {
      ++counter;
      for (int r : chart_->root_regions) enter_region_default(r, next, out, rep, counter);
      present.swap(next);
      next.clear();
    } else if (external) {
      present.push_back(*external);
    }
    for (int k = 0;; ++k) {
      if (k >= kMicroStepBudget)
        throw EngineError(EngineErrorKind::LivelockGuard,
                          std::to_string(kMicroStepBudget) + " micro-steps exceeded in " + describe());
      auto enabled = collect(present);
      if (enabled.empty()) break;
      const std::uint64_t micro = ++counter;
      for (const auto& c : select(enabled)) fire(c, next, out, rep, micro);
      present.swap(next);
      next.clear();
    }
    route(out, rep);
  }

  std::vector<Candidate> collect(const std::vector<Event>& present) const {
    std::vector<Candidate> out;
    std::vector<char> taken(chart_->transitions.size(), 0);
    auto consider = [&](int ti, const Value* payload) {
      const auto& t = chart_->transitions[static_cast<std::size_t>(ti)];
      if (taken[static_cast<std::size_t>(ti)] || !active_[static_cast<std::size_t>(t.source)]) return;
      if (!guard_holds(t, payload)) return;
      taken[static_cast<std::size_t>(ti)] = 1;
      out.push_back({ti, payload});
    };
    for (const auto& ev : present) {
      const int ei = chart_->find_event(ev.name);
      if (ei < 0) continue;
      for (int ti : chart_->by_event[static_cast<std::size_t>(ei)]) consider(ti, &ev.payload);
    }
    for (int ti : chart_->always) consider(ti, nullptr);
    for (std::size_t ti = 0; ti < due_.size(); ++ti)
      if (due_[ti] >= 0 && due_[ti] == now_) consider(static_cast<int>(ti), nullptr);
    return out;
  }

  int domain_of(const CompiledChart::Transition& t) const { return t.target < 0 ? t.source : t.domain; }

  // Outer sources win; equal depth falls back to document order. Accepted
  // transitions run in state document order, one per region.
  std::vector<Candidate> select(std::vector<Candidate> cands) const {
    const auto& tr = chart_->transitions;
    const auto& st = chart_->states;
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      const auto& ta = tr[static_cast<std::size_t>(a.transition)];
      const auto& tb = tr[static_cast<std::size_t>(b.transition)];
      const int da = st[static_cast<std::size_t>(ta.source)].depth, db = st[static_cast<std::size_t>(tb.source)].depth;
      return da != db ? da < db : ta.index < tb.index;
    });
    std::vector<Candidate> chosen;
    for (const auto& c : cands) {
      const int dc = domain_of(tr[static_cast<std::size_t>(c.transition)]);
      bool clash = false;
      for (const auto& a : chosen) {
        const int da = domain_of(tr[static_cast<std::size_t>(a.transition)]);
        if (chart_->is_ancestor_or_self(da, dc) || chart_->is_ancestor_or_self(dc, da)) {
          clash = true;
          break;
        }
      }
      if (!clash) chosen.push_back(c);
    }
    std::sort(chosen.begin(), chosen.end(), [&](const Candidate& a, const Candidate& b) {
      const auto& ta = tr[static_cast<std::size_t>(a.transition)];
      const auto& tb = tr[static_cast<std::size_t>(b.transition)];
      return ta.source != tb.source ? ta.source < tb.source : ta.index < tb.index;
    });
    return chosen;
  }

  void fire(const Candidate& c, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep,
            std::uint64_t micro) {
    const auto& t = chart_->transitions[static_cast<std::size_t>(c.transition)];
    const auto& st = chart_->states;
    rep.fired.push_back({path_, t.index, st[static_cast<std::size_t>(t.source)].path,
                         t.target >= 0 ? st[static_cast<std::size_t>(t.target)].path : std::string{}, now_, micro});
    // The payload lives in `present`, which is untouched until the micro-step ends.
    if (t.target < 0) {
      if (t.trigger == Trigger::Kind::After) due_[static_cast<std::size_t>(t.index)] = -1;
      run_actions(t.actions, c.payload, next, out, rep, micro);
      return;
    }
    exit_state(t.domain, next, out, rep, micro);
    run_actions(t.actions, c.payload, next, out, rep, micro);

    const auto& target = st[static_cast<std::size_t>(t.target)];
    int hist_region = -1;
    int effective = t.target;
    if (target.kind == StateKind::ShallowHistory) {
      hist_region = target.parent_region;
      effective = target.parent_state;
    }
    if (hist_region >= 0 && st[static_cast<std::size_t>(t.domain)].parent_region == hist_region) {
      enter_region_history(hist_region, next, out, rep, micro);
      return;
    }
    // Climb from the target to its ancestor that lies in the region the domain was exited from.
    const int region = st[static_cast<std::size_t>(t.domain)].parent_region;
    std::vector<int> chain;
    for (int s = effective; s >= 0; s = st[static_cast<std::size_t>(s)].parent_state) {
      chain.push_back(s);
      if (st[static_cast<std::size_t>(s)].parent_region == region) break;
    }
    std::reverse(chain.begin(), chain.end());
    enter_chain(chain, 0, hist_region, next, out, rep, micro);
  }

  void run_actions(const std::vector<Action>& actions, const Value* payload, std::vector<Event>& next,
                   std::vector<Outgoing>& out, StepReport& rep, std::uint64_t micro) {
    for (const auto& a : actions) {
      Value v = a.value ? eval(*a.value, scope(payload)) : Value{};
      switch (a.kind) {
        case Action::Kind::Assign: {
          const auto type = chart_->variables[static_cast<std::size_t>(a.var_index)].type;
          vars_[static_cast<std::size_t>(a.var_index)] = v.coerced(type);
          break;
        }
        case Action::Kind::Raise: {
          const auto& ev = chart_->events[static_cast<std::size_t>(a.event_index)];
          v = v.coerced(ev.payload);
          rep.raised.push_back({path_, ev.name, v, now_, micro});
          next.push_back(Event{ev.name, std::move(v)});
          break;
        }
        case Action::Kind::Send: {
          const auto& child = *chart_->slots[static_cast<std::size_t>(a.slot_index)].child;
          const auto& ev = child.events[static_cast<std::size_t>(a.event_index)];
          out.push_back({Emission::Kind::Send, a.slot_index, ev.name, v.coerced(ev.payload)});
          break;
        }
        case Action::Kind::Emit: {
          const auto& ev = chart_->events[static_cast<std::size_t>(a.event_index)];
          out.push_back({Emission::Kind::Emit, -1, ev.name, v.coerced(ev.payload)});
          break;
        }
      }
    }
  }

  void activate(int s, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep, std::uint64_t micro) {
    const auto& state = chart_->states[static_cast<std::size_t>(s)];
    active_[static_cast<std::size_t>(s)] = 1;
    for (int ti : state.timed) {
      const auto& t = chart_->transitions[static_cast<std::size_t>(ti)];
      std::int64_t d = t.after_expr ? eval(*t.after_expr, scope(nullptr)).as_int() : t.after_ms;
      due_[static_cast<std::size_t>(ti)] = now_ + std::max<std::int64_t>(d, 1);
    }
    run_actions(state.entry, nullptr, next, out, rep, micro);
  }

  void enter_chain(const std::vector<int>& chain, std::size_t i, int hist_region, std::vector<Event>& next,
                   std::vector<Outgoing>& out, StepReport& rep, std::uint64_t micro) {
    const int s = chain[i];
    activate(s, next, out, rep, micro);
    const auto& state = chart_->states[static_cast<std::size_t>(s)];
    for (int r : state.regions) {
      if (i + 1 < chain.size() && chart_->states[static_cast<std::size_t>(chain[i + 1])].parent_region == r)
        enter_chain(chain, i + 1, hist_region, next, out, rep, micro);
      else if (r == hist_region)
        enter_region_history(r, next, out, rep, micro);
      else
        enter_region_default(r, next, out, rep, micro);
    }
  }

  void enter_state_default(int s, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep,
                           std::uint64_t micro) {
    activate(s, next, out, rep, micro);
    for (int r : chart_->states[static_cast<std::size_t>(s)].regions) enter_region_default(r, next, out, rep, micro);
  }

  void enter_region_default(int r, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep,
                            std::uint64_t micro) {
    enter_state_default(chart_->regions[static_cast<std::size_t>(r)].initial, next, out, rep, micro);
  }

  void enter_region_history(int r, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep,
                            std::uint64_t micro) {
    const int h = history_[static_cast<std::size_t>(r)];
    enter_state_default(h >= 0 ? h : chart_->regions[static_cast<std::size_t>(r)].initial, next, out, rep, micro);
  }

  void exit_state(int s, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep, std::uint64_t micro) {
    if (!active_[static_cast<std::size_t>(s)]) return;
    const auto& state = chart_->states[static_cast<std::size_t>(s)];
    for (int r : state.regions) exit_region(r, next, out, rep, micro);
    run_actions(state.exit, nullptr, next, out, rep, micro);
    active_[static_cast<std::size_t>(s)] = 0;
    for (int ti : state.timed) due_[static_cast<std::size_t>(ti)] = -1;
    if (state.parent_region >= 0) history_[static_cast<std::size_t>(state.parent_region)] = s;
  }

  void exit_region(int r, std::vector<Event>& next, std::vector<Outgoing>& out, StepReport& rep, std::uint64_t micro) {
    for (int s : chart_->regions[static_cast<std::size_t>(r)].states)
      if (active_[static_cast<std::size_t>(s)]) exit_state(s, next, out, rep, micro);
  }

  void check_local(std::vector<std::string>& problems) const {
    const std::string who = path_.empty() ? chart_->name : path_;
    bool any = false;
    for (char a : active_) any = any || a;
    if (any != entered_) problems.push_back(who + ": configuration emptiness disagrees with entered flag");
    if (!entered_) return;
    auto check_region = [&](int r, auto& self) -> void {
      int count = 0;
      for (int s : chart_->regions[static_cast<std::size_t>(r)].states) {
        if (!active_[static_cast<std::size_t>(s)]) continue;
        ++count;
        if (chart_->states[static_cast<std::size_t>(s)].kind == StateKind::ShallowHistory)
          problems.push_back(who + ": history node active " + chart_->states[static_cast<std::size_t>(s)].path);
        for (int sub : chart_->states[static_cast<std::size_t>(s)].regions) self(sub, self);
      }
      if (count != 1)
        problems.push_back(who + ": region " + chart_->regions[static_cast<std::size_t>(r)].path + " has " +
                           std::to_string(count) + " active states");
    };
    for (int r : chart_->root_regions) check_region(r, check_region);
    for (std::size_t s = 0; s < active_.size(); ++s) {
      if (!active_[s]) continue;
      const int p = chart_->states[s].parent_state;
      if (p >= 0 && !active_[static_cast<std::size_t>(p)])
        problems.push_back(who + ": " + chart_->states[s].path + " active under inactive parent");
    }
  }

  std::shared_ptr<const CompiledChart> chart_;
  MachineInstance* parent_ = nullptr;
  std::string path_;
  int slot_in_parent_ = -1;
  bool entered_ = false;
  std::int64_t now_ = 0;
  std::uint64_t micro_counter_ = 0;  // meaningful on the root only
  std::vector<char> active_;
  std::vector<std::int64_t> due_;  // per transition; -1 when not armed
  std::vector<int> history_;       // per region: last active state
  std::vector<Value> vars_;
  std::deque<Event> queue_;
  std::vector<std::unique_ptr<MachineInstance>> children_;
};

}  // namespace stl4iot::sc
