#include <gtest/gtest.h>

#include <algorithm>

#include "stl4iot/sc/compose.hpp"
#include "stl4iot/sc/json_io.hpp"
#include "stl4iot/sc/validate.hpp"

using namespace stl4iot::sc;
using namespace stl4iot::sc::build;

namespace {

StatechartDef toggle_machine() {
  StatechartDef d;
  d.name = "switch";
  d.events = {in("toggle")};
  d.root = {region("main", {basic("Off", true), basic("On")})};
  d.transitions = {tr("Off", "On", on("toggle")), tr("On", "Off", on("toggle"))};
  return d;
}

bool has(const std::vector<Violation>& v, ViolationKind k, const std::string& path_part = {}) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Violation& x) { return x.kind == k && x.path.find(path_part) != std::string::npos; });
}

}  // namespace

TEST(Validate, MinimalMachineIsValid) {
  auto v = check_definition(toggle_machine());
  EXPECT_TRUE(v.empty()) << (v.empty() ? "" : v[0].describe());
  auto c = validate_definition(toggle_machine());
  EXPECT_EQ(c->states.size(), 2u);
  EXPECT_GE(c->find_state("main/Off"), 0);
}

TEST(Validate, UnknownStateNamed) {
  auto d = toggle_machine();
  d.transitions[0].target = "Onn";
  auto v = check_definition(d);
  EXPECT_TRUE(has(v, ViolationKind::UnknownStateRef, "Onn"));
  EXPECT_THROW(validate_definition(d), ValidationError);
}

TEST(Validate, InitialStateRules) {
  auto d = toggle_machine();
  d.root[0].states[1].initial = true;
  EXPECT_TRUE(has(check_definition(d), ViolationKind::DuplicateInitial, "main"));
  d.root[0].states[0].initial = false;
  d.root[0].states[1].initial = false;
  EXPECT_TRUE(has(check_definition(d), ViolationKind::MissingInitial, "main"));
}

TEST(Validate, UndeclaredEventAndTypeMismatch) {
  auto d = toggle_machine();
  d.transitions[0].trigger = on("flip");
  EXPECT_TRUE(has(check_definition(d), ViolationKind::UndeclaredEvent, "flip"));
  d = toggle_machine();
  d.variables = {var("n", ValueType::Int)};
  d.transitions[0].guard = "n";
  EXPECT_TRUE(has(check_definition(d), ViolationKind::TypeMismatch));
  d.transitions[0].guard = "";
  d.transitions[0].actions = {"n := true"};
  EXPECT_TRUE(has(check_definition(d), ViolationKind::TypeMismatch));
  d.transitions[0].actions = {"raise nothing"};
  EXPECT_TRUE(has(check_definition(d), ViolationKind::UndeclaredEvent, "nothing"));
}

TEST(Validate, AllViolationsReported) {
  auto d = toggle_machine();
  d.transitions[0].target = "Nowhere";
  d.transitions[1].trigger = on("missing");
  d.root[0].states[1].initial = true;
  EXPECT_GE(check_definition(d).size(), 3u);
}

TEST(Validate, UnboundSlot) {
  auto d = toggle_machine();
  d.slots = {SubmachineSlot{"base", nullptr, {}}};
  EXPECT_TRUE(has(check_definition(d), ViolationKind::UnboundSlot, "base"));
}

TEST(Validate, DeepHistoryRejected) {
  auto d = toggle_machine();
  StateNode h = history();
  h.kind = StateKind::DeepHistory;
  d.root[0].states.push_back(h);
  EXPECT_TRUE(has(check_definition(d), ViolationKind::DeepHistoryUnsupported));
}

TEST(Validate, NonPositiveDurationRejected) {
  auto d = toggle_machine();
  d.transitions[0].trigger = after(0);
  EXPECT_TRUE(has(check_definition(d), ViolationKind::InvalidDuration));
}

TEST(Validate, KindRegionCountConsistency) {
  auto d = toggle_machine();
  d.root[0].states[1] = orthogonal("On", {region("only", {basic("X", true)})});
  EXPECT_FALSE(check_definition(d).empty());
}

TEST(Validate, SuffixReferencesMustBeUnique) {
  StatechartDef d;
  d.name = "amb";
  d.events = {in("e")};
  d.root = {region("a", {composite("P", region("r", {basic("X", true)}), true)}),
            region("b", {composite("Q", region("r", {basic("X", true), basic("Y")}), true)})};
  d.transitions = {tr("X", "Y", on("e"))};
  EXPECT_TRUE(has(check_definition(d), ViolationKind::UnknownStateRef, "X"));
  d.transitions = {tr("Q/r/X", "Y", on("e"))};
  EXPECT_TRUE(check_definition(d).empty());
}

TEST(Compose, EmbedBindsChild) {
  StatechartDef parent;
  parent.name = "room";
  parent.events = {in("lamp_on")};
  parent.root = {region("main", {basic("Idle", true)})};
  parent.slots = {SubmachineSlot{"lamp", nullptr, {}}};
  EXPECT_TRUE(has(check_definition(parent), ViolationKind::UnboundSlot));
  auto child = std::make_shared<const StatechartDef>(toggle_machine());
  auto composed = embed_submachine(parent, "lamp", child, {{EventRoute::Direction::Down, "toggle", "lamp_on"}});
  EXPECT_TRUE(check_definition(composed).empty());
}

TEST(Compose, Errors) {
  StatechartDef parent;
  parent.name = "room";
  parent.events = {in("changed")};
  parent.root = {region("main", {basic("Idle", true)})};
  parent.slots = {SubmachineSlot{"lamp", nullptr, {}}};
  auto c = toggle_machine();
  c.events.push_back(out("changed"));
  auto child = std::make_shared<const StatechartDef>(c);
  auto kind_of = [&](auto&& f) {
    try {
      f();
    } catch (const ComposeError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return ComposeErrorKind::UnknownSlot;
  };
  EXPECT_EQ(kind_of([&] { embed_submachine(parent, "nope", child, {}); }), ComposeErrorKind::UnknownSlot);
  EXPECT_EQ(kind_of([&] { embed_submachine(parent, "lamp", child, {}); }), ComposeErrorKind::NameClash);
  EXPECT_EQ(kind_of([&] { embed_submachine(parent, "lamp", child, {{EventRoute::Direction::Up, "toggle", "changed"}}); }),
            ComposeErrorKind::UnroutableEvent);
  EXPECT_NO_THROW(embed_submachine(parent, "lamp", child, {{EventRoute::Direction::Up, "changed", "changed"}}));
}

TEST(JsonIo, RoundTripPreservesDefinition) {
  StatechartDef d = toggle_machine();
  d.variables = {var("level", ValueType::Real, 0.5), var("count", ValueType::Int), var("label", ValueType::String, "x")};
  d.events.push_back(out("done", ValueType::Bool));
  d.transitions.push_back(local("On", after("count * 10 + 5"), "level > 0.25", {"count := count + 1", "emit done(true)"}));
  d.root[0].states.push_back(history());
  auto child = std::make_shared<const StatechartDef>(toggle_machine());
  d.slots = {SubmachineSlot{"inner", child, {{EventRoute::Direction::Down, "toggle", "toggle"}}}};
  const std::string text = dump_definition(d);
  const StatechartDef back = parse_definition(text);
  EXPECT_EQ(dump_definition(back), text);
  EXPECT_TRUE(check_definition(back).empty());
  ASSERT_EQ(back.variables.size(), 3u);
  EXPECT_EQ(back.variables[0].initial, Value(0.5));
  EXPECT_FALSE(back.transitions[2].target.has_value());
}

TEST(JsonIo, MalformedInputsRejected) {
  EXPECT_THROW(parse_definition("{"), FormatError);
  EXPECT_THROW(parse_definition(R"({"events": []})"), FormatError);
  EXPECT_THROW(parse_definition(R"({"name": "x", "variables": [{"name": "v", "type": "float"}]})"), FormatError);
  EXPECT_THROW(parse_definition(R"({"name": "x", "variables": [{"name": "v", "type": "int", "initial": true}]})"),
               FormatError);
  EXPECT_THROW(parse_definition(R"({"name": "x", "root": [{"name": "r", "states": [{"name": "s", "kind": "weird"}]}]})"),
               FormatError);
  EXPECT_THROW(parse_definition(R"({"name": "x", "transitions": [{"source": "a", "trigger": {"kind": "later"}}]})"),
               FormatError);
}
