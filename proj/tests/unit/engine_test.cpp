#include <gtest/gtest.h>

#include "stl4iot/sc/engine.hpp"

using namespace stl4iot::sc;
using namespace stl4iot::sc::build;

namespace {

std::shared_ptr<const CompiledChart> compile(const StatechartDef& d) { return validate_definition(d); }

// Two orthogonal regions reacting to the same event.
StatechartDef two_regions() {
  StatechartDef d;
  d.name = "pair";
  d.events = {in("go"), internal("ping")};
  d.variables = {var("n", ValueType::Int)};
  d.root = {region("a", {basic("A1", true), basic("A2")}), region("b", {basic("B1", true), basic("B2")})};
  d.transitions = {
      tr("A1", "A2", on("go"), "", {"raise ping"}),
      tr("B1", "B2", on("go")),
      tr("B2", "B1", on("ping"), "", {"n := n + 1"}),
  };
  return d;
}

}  // namespace

TEST(Engine, EnterProducesInitialConfiguration) {
  MachineInstance m(compile(two_regions()));
  auto rep = m.enter();
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"a/A1", "b/B1"}));
  EXPECT_TRUE(m.check_well_formed().empty());
  EXPECT_THROW(m.enter(), EngineError);
}

TEST(Engine, RaisedEventVisibleOnlyInNextMicroStep) {
  MachineInstance m(compile(two_regions()));
  m.enter();
  auto rep = m.dispatch({"go", {}});
  ASSERT_EQ(rep.fired.size(), 3u);
  EXPECT_EQ(rep.fired[0].transition, 0);
  EXPECT_EQ(rep.fired[1].transition, 1);
  EXPECT_EQ(rep.fired[0].micro_step, rep.fired[1].micro_step);
  EXPECT_EQ(rep.fired[2].transition, 2);
  EXPECT_EQ(rep.fired[2].micro_step, rep.fired[1].micro_step + 1);
  EXPECT_EQ(m.read_var("n").as_int(), 1);
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"a/A2", "b/B1"}));
}

TEST(Engine, UndeclaredEventRejected) {
  MachineInstance m(compile(two_regions()));
  EXPECT_THROW(m.dispatch({"go", {}}), EngineError);
  m.enter();
  try {
    m.dispatch({"nope", {}});
    FAIL();
  } catch (const EngineError& e) {
    EXPECT_EQ(e.kind(), EngineErrorKind::UndeclaredEvent);
  }
}

TEST(Engine, OuterTransitionWinsConflict) {
  StatechartDef d;
  d.name = "nest";
  d.events = {in("e")};
  d.root = {region("main", {composite("C", region("r", {basic("X", true), basic("Y")}), true), basic("D")})};
  d.transitions = {tr("X", "Y", on("e")), tr("C", "D", on("e"))};
  MachineInstance m(compile(d));
  m.enter();
  auto rep = m.dispatch({"e", {}});
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_EQ(rep.fired[0].transition, 1);
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"main/D"}));
}

TEST(Engine, SameDepthConflictUsesDocumentOrder) {
  StatechartDef d;
  d.name = "order";
  d.events = {in("e")};
  d.root = {region("main", {basic("A", true), basic("B"), basic("C")})};
  d.transitions = {tr("A", "C", on("e")), tr("A", "B", on("e"))};
  MachineInstance m(compile(d));
  m.enter();
  auto rep = m.dispatch({"e", {}});
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"main/C"}));
}

TEST(Engine, GuardsSeePreStepSnapshotActionsSequential) {
  StatechartDef d;
  d.name = "snap";
  d.events = {in("e")};
  d.variables = {var("x", ValueType::Int), var("y", ValueType::Int)};
  d.root = {region("a", {basic("A", true), basic("A2")}), region("b", {basic("B", true), basic("B2")})};
  d.transitions = {
      tr("A", "A2", on("e"), "x == 0", {"x := 5", "y := x * 2"}),
      tr("B", "B2", on("e"), "x == 0", {"y := y + 1"}),
  };
  MachineInstance m(compile(d));
  m.enter();
  m.dispatch({"e", {}});
  EXPECT_EQ(m.read_var("x").as_int(), 5);
  EXPECT_EQ(m.read_var("y").as_int(), 11);
  EXPECT_TRUE(m.is_active("B2"));
}

TEST(Engine, TimerFiresAtDueInstant) {
  StatechartDef d;
  d.name = "timer";
  d.events = {in("e")};
  d.root = {region("main", {basic("A", true), basic("B")})};
  d.transitions = {tr("A", "B", after(1000)), tr("B", "A", on("e"))};
  MachineInstance m(compile(d));
  m.enter();
  EXPECT_TRUE(m.advance_time(999).fired.empty());
  auto rep = m.advance_time(1);
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_EQ(rep.fired[0].t_ms, 1000);
  m.dispatch({"e", {}});
  rep = m.advance_time(5000);
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_EQ(rep.fired[0].t_ms, 2000);
}

TEST(Engine, TimerCancelledWhenSourceLeft) {
  StatechartDef d;
  d.name = "cancel";
  d.events = {in("e")};
  d.root = {region("main", {basic("A", true), basic("B"), basic("C")})};
  d.transitions = {tr("A", "B", after(1000)), tr("A", "C", on("e"))};
  MachineInstance m(compile(d));
  m.enter();
  m.advance_time(500);
  m.dispatch({"e", {}});
  auto rep = m.advance_time(1000);
  EXPECT_TRUE(rep.fired.empty());
  EXPECT_TRUE(m.is_active("C"));
}

TEST(Engine, PeriodicSelfLoopFiresOncePerPeriod) {
  StatechartDef d;
  d.name = "tick";
  d.variables = {var("ticks", ValueType::Int)};
  d.root = {region("main", {basic("S", true)})};
  d.transitions = {tr("S", "S", after(250), "", {"ticks := ticks + 1"})};
  MachineInstance m(compile(d));
  m.enter();
  m.advance_time(1000);
  EXPECT_EQ(m.read_var("ticks").as_int(), 4);
  m.advance_time(249);
  EXPECT_EQ(m.read_var("ticks").as_int(), 4);
}

TEST(Engine, SplitAdvanceMatchesSingleAdvance) {
  StatechartDef d;
  d.name = "split";
  d.variables = {var("ticks", ValueType::Int)};
  d.root = {region("main", {basic("S", true)})};
  d.transitions = {tr("S", "S", after(300), "", {"ticks := ticks + 1"})};
  MachineInstance a(compile(d)), b(compile(d));
  a.enter();
  b.enter();
  auto ra = a.advance_time(1000);
  auto rb1 = b.advance_time(450);
  auto rb2 = b.advance_time(550);
  rb1.append(std::move(rb2));
  ASSERT_EQ(ra.fired.size(), rb1.fired.size());
  for (std::size_t i = 0; i < ra.fired.size(); ++i) EXPECT_EQ(ra.fired[i].t_ms, rb1.fired[i].t_ms);
  EXPECT_EQ(ra.config_after, rb1.config_after);
}

TEST(Engine, SiblingTransitionKeepsOtherRegionTimers) {
  StatechartDef d;
  d.name = "sib";
  d.events = {in("e")};
  d.variables = {var("ticks", ValueType::Int)};
  d.root = {region("main", {orthogonal("P", {region("a", {basic("X", true), basic("Y")}), region("b", {basic("T", true)})},
                                       true)})};
  d.transitions = {tr("X", "Y", on("e")), tr("T", "T", after(500), "", {"ticks := ticks + 1"})};
  MachineInstance m(compile(d));
  m.enter();
  m.advance_time(300);
  auto rep = m.dispatch({"e", {}});
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_EQ(m.next_due(), std::optional<std::int64_t>(500));
  m.advance_time(200);
  EXPECT_EQ(m.read_var("ticks").as_int(), 1);
}

TEST(Engine, LivelockGuardTrips) {
  StatechartDef d;
  d.name = "loop";
  d.root = {region("main", {basic("A", true), basic("B")})};
  d.transitions = {tr("A", "B", always()), tr("B", "A", always())};
  MachineInstance m(compile(d));
  try {
    m.enter();
    FAIL();
  } catch (const EngineError& e) {
    EXPECT_EQ(e.kind(), EngineErrorKind::LivelockGuard);
  }
}

TEST(Engine, ShallowHistoryRestoresLastChild) {
  StatechartDef d;
  d.name = "hist";
  d.events = {in("next"), in("leave"), in("back")};
  d.root = {region("main", {composite("C", region("r", {basic("P", true), basic("Q"), history()}), true), basic("Out")})};
  d.transitions = {tr("P", "Q", on("next")), tr("C", "Out", on("leave")), tr("Out", "C/r/H", on("back"))};
  MachineInstance m(compile(d));
  m.enter();
  m.dispatch({"next", {}});
  m.dispatch({"leave", {}});
  auto rep = m.dispatch({"back", {}});
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"main/C", "main/C/r/Q"}));
  EXPECT_TRUE(m.check_well_formed().empty());
}

TEST(Engine, EntryExitOrderAndLocalReaction) {
  StatechartDef d;
  d.name = "order";
  d.events = {in("e"), in("poke")};
  d.variables = {var("log", ValueType::Int)};
  d.root = {region("main", {composite("C", region("r", {basic("I", true, {}, {"log := log * 10 + 1"})}), true, {},
                                      {"log := log * 10 + 2"}),
                            basic("D", false, {"log := log * 10 + 3"})})};
  d.transitions = {tr("C", "D", on("e"), "", {"log := log * 10 + 9"}), local("D", on("poke"), "", {"log := log + 1000"})};
  MachineInstance m(compile(d));
  m.enter();
  m.dispatch({"e", {}});
  EXPECT_EQ(m.read_var("log").as_int(), 1293);
  auto rep = m.dispatch({"poke", {}});
  EXPECT_EQ(m.read_var("log").as_int(), 2293);
  ASSERT_EQ(rep.fired.size(), 1u);
  EXPECT_TRUE(rep.fired[0].target.empty());
}

TEST(Engine, InjectRunsAlwaysTransitions) {
  StatechartDef d;
  d.name = "inj";
  d.variables = {var("hot", ValueType::Bool)};
  d.root = {region("main", {basic("Cool", true), basic("Hot")})};
  d.transitions = {tr("Cool", "Hot", always(), "hot"), tr("Hot", "Cool", always(), "!hot")};
  MachineInstance m(compile(d));
  m.enter();
  m.inject("hot", true);
  EXPECT_TRUE(m.is_active("Hot"));
  EXPECT_THROW(m.inject("cold", true), EngineError);
}

TEST(Engine, ExitThenReenterGivesSameConfiguration) {
  MachineInstance m(compile(two_regions()));
  auto first = m.enter().config_after;
  m.dispatch({"go", {}});
  EXPECT_TRUE(m.exit().config_after.empty());
  EXPECT_TRUE(m.check_well_formed().empty());
  EXPECT_EQ(m.enter().config_after, first);
}

namespace {

std::shared_ptr<StatechartDef> child_def() {
  auto c = std::make_shared<StatechartDef>();
  c->name = "lamp";
  c->events = {in("toggle"), out("changed", ValueType::Bool)};
  c->variables = {var("lit", ValueType::Bool)};
  c->root = {region("main", {basic("Off", true), basic("On", false, {"lit := true"}, {"lit := false"})})};
  c->transitions = {tr("Off", "On", on("toggle"), "", {"emit changed(true)"}),
                    tr("On", "Off", on("toggle"), "", {"emit changed(false)"})};
  return c;
}

}  // namespace

TEST(Engine, SendAndEmitAcrossSlots) {
  StatechartDef p;
  p.name = "room";
  p.events = {in("flip"), in("lamp_changed", ValueType::Bool)};
  p.variables = {var("count", ValueType::Int)};
  p.root = {region("main", {basic("Idle", true)})};
  p.transitions = {local("Idle", on("flip"), "", {"send lamp.toggle"}),
                   local("Idle", on("lamp_changed"), "payload && lamp.lit", {"count := count + 1"})};
  p.slots = {SubmachineSlot{"lamp", child_def(), {{EventRoute::Direction::Up, "changed", "lamp_changed"}}}};
  MachineInstance m(compile(p));
  auto rep = m.enter();
  EXPECT_EQ(rep.config_after, (std::set<std::string>{"main/Idle", "lamp/main/Off"}));
  rep = m.dispatch({"flip", {}});
  ASSERT_EQ(rep.emitted.size(), 2u);
  EXPECT_EQ(rep.emitted[0].kind, Emission::Kind::Send);
  EXPECT_EQ(rep.emitted[0].to, "lamp");
  EXPECT_EQ(rep.emitted[1].kind, Emission::Kind::Emit);
  EXPECT_EQ(rep.emitted[1].payload, Value(true));
  EXPECT_EQ(m.read_var("count").as_int(), 1);
  EXPECT_TRUE(m.find("lamp")->is_active("On"));
  m.dispatch_to("lamp", {"toggle", {}});
  EXPECT_EQ(m.read_var("count").as_int(), 1);
  EXPECT_FALSE(m.find("lamp")->read_var("lit").as_bool());
}

TEST(Engine, DownRouteForwardsAfterParent) {
  StatechartDef p;
  p.name = "room";
  p.events = {in("flip")};
  p.root = {region("main", {basic("Idle", true)})};
  p.slots = {SubmachineSlot{"lamp", child_def(), {{EventRoute::Direction::Down, "toggle", "flip"}}}};
  MachineInstance m(compile(p));
  m.enter();
  auto rep = m.dispatch({"flip", {}});
  EXPECT_TRUE(rep.config_after.count("lamp/main/On"));
  ASSERT_EQ(rep.emitted.size(), 1u);
  EXPECT_EQ(rep.emitted[0].from, "lamp");
  EXPECT_EQ(rep.emitted[0].to, "");
  EXPECT_FALSE(rep.emitted[0].delivered);
}
