#include <gtest/gtest.h>

#include "stl4iot/sc/expr.hpp"

using namespace stl4iot::sc;

namespace {

struct Env {
  std::vector<std::string> names{"a", "b", "r", "flag"};
  std::vector<ValueType> types{ValueType::Int, ValueType::Int, ValueType::Real, ValueType::Bool};
  std::vector<Value> values{Value(7), Value(2), Value(1.5), Value(true)};

  TypeScope types_scope(ValueType payload = ValueType::None) const {
    TypeScope s;
    s.var = [this](std::string_view n) -> std::optional<std::pair<int, ValueType>> {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return std::make_pair(static_cast<int>(i), types[i]);
      return std::nullopt;
    };
    s.payload = payload;
    return s;
  }

  Value run(const std::string& src, const Value* payload = nullptr, std::int64_t now = 0) const {
    auto e = parse_expr(src);
    resolve(*e, types_scope(payload ? payload->type() : ValueType::None));
    EvalScope s;
    s.vars = &values;
    s.payload = payload;
    s.now = now;
    return eval(*e, s);
  }
};

}  // namespace

TEST(Expr, ArithmeticAndPrecedence) {
  Env env;
  EXPECT_EQ(env.run("a + b * 3").as_int(), 13);
  EXPECT_EQ(env.run("(a + b) * 3").as_int(), 27);
  EXPECT_EQ(env.run("a / b").as_int(), 3);
  EXPECT_EQ(env.run("a % b").as_int(), 1);
  EXPECT_EQ(env.run("-a + 1").as_int(), -6);
  EXPECT_DOUBLE_EQ(env.run("r * 2").as_real(), 3.0);
  EXPECT_DOUBLE_EQ(env.run("a + r").as_real(), 8.5);
}

TEST(Expr, DivisionByZeroIsZero) {
  Env env;
  EXPECT_EQ(env.run("a / (b - 2)").as_int(), 0);
  EXPECT_DOUBLE_EQ(env.run("r / 0.0").as_real(), 0.0);
}

TEST(Expr, BooleanLogic) {
  Env env;
  EXPECT_TRUE(env.run("flag && a > b").as_bool());
  EXPECT_FALSE(env.run("!flag || a < b").as_bool());
  EXPECT_TRUE(env.run("a >= 7 && r <= 1.5").as_bool());
  EXPECT_TRUE(env.run("a != b").as_bool());
  EXPECT_TRUE(env.run("a == 7.0").as_bool());
}

TEST(Expr, PayloadAndNow) {
  Env env;
  Value p(61.0);
  EXPECT_TRUE(env.run("payload >= 60.0", &p).as_bool());
  EXPECT_EQ(env.run("now - 100", nullptr, 350).as_int(), 250);
}

TEST(Expr, LiteralsAndStrings) {
  Env env;
  EXPECT_EQ(env.run("\"abc\" == \"abc\"").as_bool(), true);
  EXPECT_EQ(env.run("true").as_bool(), true);
  EXPECT_DOUBLE_EQ(env.run("2.25").as_real(), 2.25);
}

TEST(Expr, TypeErrors) {
  Env env;
  auto check = [&](const std::string& src) {
    auto e = parse_expr(src);
    EXPECT_THROW(resolve(*e, env.types_scope()), TypeError) << src;
  };
  check("flag + 1");
  check("a && flag");
  check("!a");
  check("unknown_var > 1");
  check("payload");
  check("\"x\" < \"y\"");
}

TEST(Expr, ParseErrors) {
  EXPECT_THROW(parse_expr("a +"), ParseError);
  EXPECT_THROW(parse_expr("(a"), ParseError);
  EXPECT_THROW(parse_expr("a b"), ParseError);
  EXPECT_THROW(parse_action("raise"), ParseError);
  EXPECT_THROW(parse_action("x = 1"), ParseError);
}

TEST(Expr, ActionForms) {
  auto a = parse_action("x := x + 1");
  EXPECT_EQ(a.kind, Action::Kind::Assign);
  EXPECT_EQ(a.target, "x");
  auto r = parse_action("raise SensorReading(true)");
  EXPECT_EQ(r.kind, Action::Kind::Raise);
  EXPECT_EQ(r.target, "SensorReading");
  ASSERT_TRUE(r.value);
  auto s = parse_action("send base.actuate(false)");
  EXPECT_EQ(s.kind, Action::Kind::Send);
  EXPECT_EQ(s.slot, "base");
  EXPECT_EQ(s.target, "actuate");
  auto e = parse_action("emit emergency");
  EXPECT_EQ(e.kind, Action::Kind::Emit);
  EXPECT_FALSE(e.value);
}
