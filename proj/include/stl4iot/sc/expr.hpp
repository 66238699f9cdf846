#pragma once

// Guard and action mini-language.
//
//   expr   := or
//   or     := and ('||' and)*
//   and    := not ('&&' not)*
//   not    := '!' not | cmp
//   cmp    := sum (('=='|'!='|'<'|'<='|'>'|'>=') sum)?
//   sum    := prod (('+'|'-') prod)*
//   prod   := unary (('*'|'/'|'%') unary)*
//   unary  := '-' unary | atom
//   atom   := literal | ident | ident '.' ident | '(' expr ')'
//
//   action := ident ':=' expr
//           | 'raise' ident ['(' expr ')']
//           | 'send' ident '.' ident ['(' expr ')']
//           | 'emit' ident ['(' expr ')']
//
// `payload` names the triggering event's payload, `now` the virtual clock,
// `slot.var` a variable of a bound submachine (read-only).

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stl4iot/sc/value.hpp"

namespace stl4iot::sc {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Expr {
  enum class Kind { Literal, Var, Payload, Now, SlotVar, Not, Neg, Binary };

  Kind kind = Kind::Literal;
  Value literal;
  std::string name;  // variable name (Var, SlotVar)
  std::string slot;  // SlotVar only
  std::string op;    // Binary operator
  std::shared_ptr<Expr> lhs, rhs;

  // Filled in by resolve().
  int var_index = -1;
  int slot_index = -1;
  ValueType type = ValueType::None;
};

using ExprPtr = std::shared_ptr<Expr>;

struct Action {
  enum class Kind { Assign, Raise, Send, Emit };

  Kind kind = Kind::Assign;
  std::string target;  // variable (Assign) or event name
  std::string slot;    // Send only
  ExprPtr value;       // may be null for payload-less events

  int var_index = -1;
  int event_index = -1;
  int slot_index = -1;
};

namespace detail {

struct Token {
  enum class Kind { End, Ident, Int, Real, String, Op };
  Kind kind = Kind::End;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  bool accept_op(std::string_view op) {
    if (tok_.kind == Token::Kind::Op && tok_.text == op) {
      advance();
      return true;
    }
    return false;
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) throw ParseError("expected '" + std::string(op) + "'", tok_.pos);
  }

  std::string expect_ident() {
    if (tok_.kind != Token::Kind::Ident) throw ParseError("expected identifier", tok_.pos);
    return take().text;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    tok_ = Token{};
    tok_.pos = i_;
    if (i_ >= src_.size()) return;
    const char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) ++j;
      tok_.kind = Token::Kind::Ident;
      tok_.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      bool real = false;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      if (j < src_.size() && src_[j] == '.') {
        real = true;
        ++j;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      }
      if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
        real = true;
        ++j;
        if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      }
      tok_.kind = real ? Token::Kind::Real : Token::Kind::Int;
      tok_.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    if (c == '"') {
      std::size_t j = i_ + 1;
      std::string s;
      while (j < src_.size() && src_[j] != '"') {
        if (src_[j] == '\\' && j + 1 < src_.size()) ++j;
        s.push_back(src_[j++]);
      }
      if (j >= src_.size()) throw ParseError("unterminated string", i_);
      tok_.kind = Token::Kind::String;
      tok_.text = std::move(s);
      i_ = j + 1;
      return;
    }
    static constexpr std::string_view two[] = {":=", "==", "!=", "<=", ">=", "&&", "||"};
    for (auto op : two) {
      if (src_.substr(i_, 2) == op) {
        tok_.kind = Token::Kind::Op;
        tok_.text = std::string(op);
        i_ += 2;
        return;
      }
    }
    if (std::string_view("+-*/%<>!().").find(c) != std::string_view::npos) {
      tok_.kind = Token::Kind::Op;
      tok_.text = std::string(1, c);
      ++i_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i_);
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Token tok_;
};

inline ExprPtr make_binary(std::string op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Binary;
  e->op = std::move(op);
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  ExprPtr parse_expr() { return parse_or(); }

  Action parse_action() {
    Action a;
    const Token first = lex_.peek();
    if (first.kind != Token::Kind::Ident) throw ParseError("expected action", first.pos);
    if (first.text == "raise" || first.text == "emit" || first.text == "send") {
      lex_.take();
      if (first.text == "send") {
        a.kind = Action::Kind::Send;
        a.slot = lex_.expect_ident();
        lex_.expect_op(".");
      } else {
        a.kind = first.text == "raise" ? Action::Kind::Raise : Action::Kind::Emit;
      }
      a.target = lex_.expect_ident();
      if (lex_.accept_op("(")) {
        a.value = parse_expr();
        lex_.expect_op(")");
      }
    } else {
      a.kind = Action::Kind::Assign;
      a.target = lex_.expect_ident();
      lex_.expect_op(":=");
      a.value = parse_expr();
    }
    return a;
  }

  void expect_end() {
    if (lex_.peek().kind != Token::Kind::End) throw ParseError("trailing input", lex_.peek().pos);
  }

 private:
  ExprPtr parse_or() {
    auto l = parse_and();
    while (lex_.accept_op("||")) l = make_binary("||", l, parse_and());
    return l;
  }

  ExprPtr parse_and() {
    auto l = parse_not();
    while (lex_.accept_op("&&")) l = make_binary("&&", l, parse_not());
    return l;
  }

  ExprPtr parse_not() {
    if (lex_.accept_op("!")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Not;
      e->lhs = parse_not();
      return e;
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    auto l = parse_sum();
    for (auto op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (lex_.accept_op(op)) return make_binary(op, l, parse_sum());
    }
    return l;
  }

  ExprPtr parse_sum() {
    auto l = parse_prod();
    for (;;) {
      if (lex_.accept_op("+")) l = make_binary("+", l, parse_prod());
      else if (lex_.accept_op("-")) l = make_binary("-", l, parse_prod());
      else return l;
    }
  }

  ExprPtr parse_prod() {
    auto l = parse_unary();
    for (;;) {
      if (lex_.accept_op("*")) l = make_binary("*", l, parse_unary());
      else if (lex_.accept_op("/")) l = make_binary("/", l, parse_unary());
      else if (lex_.accept_op("%")) l = make_binary("%", l, parse_unary());
      else return l;
    }
  }

  ExprPtr parse_unary() {
    if (lex_.accept_op("-")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Neg;
      e->lhs = parse_unary();
      return e;
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    auto e = std::make_shared<Expr>();
    const Token t = lex_.peek();
    switch (t.kind) {
      case Token::Kind::Int:
        lex_.take();
        e->literal = Value(static_cast<std::int64_t>(std::stoll(t.text)));
        return e;
      case Token::Kind::Real:
        lex_.take();
        e->literal = Value(std::stod(t.text));
        return e;
      case Token::Kind::String:
        lex_.take();
        e->literal = Value(t.text);
        return e;
      case Token::Kind::Ident: {
        lex_.take();
        if (t.text == "true" || t.text == "false") {
          e->literal = Value(t.text == "true");
        } else if (t.text == "payload") {
          e->kind = Expr::Kind::Payload;
        } else if (t.text == "now") {
          e->kind = Expr::Kind::Now;
        } else if (lex_.accept_op(".")) {
          e->kind = Expr::Kind::SlotVar;
          e->slot = t.text;
          e->name = lex_.expect_ident();
        } else {
          e->kind = Expr::Kind::Var;
          e->name = t.text;
        }
        return e;
      }
      case Token::Kind::Op:
        if (t.text == "(") {
          lex_.take();
          auto inner = parse_expr();
          lex_.expect_op(")");
          return inner;
        }
        break;
      case Token::Kind::End:
        break;
    }
    throw ParseError("expected expression", t.pos);
  }

  Lexer lex_;
};

}  // namespace detail

inline ExprPtr parse_expr(std::string_view src) {
  detail::Parser p(src);
  auto e = p.parse_expr();
  p.expect_end();
  return e;
}

inline Action parse_action(std::string_view src) {
  detail::Parser p(src);
  auto a = p.parse_action();
  p.expect_end();
  return a;
}

/// Name resolution used while type-checking an expression.
struct TypeScope {
  std::function<std::optional<std::pair<int, ValueType>>(std::string_view)> var;
  std::function<std::optional<std::pair<int, int>>(std::string_view slot, std::string_view var)> slot_var;
  std::function<ValueType(int slot, int var)> slot_var_type;
  ValueType payload = ValueType::None;
};

/// Resolves names to indices and annotates node types. Throws TypeError.
inline ValueType resolve(Expr& e, const TypeScope& scope) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Literal:
      e.type = e.literal.type();
      break;
    case K::Now:
      e.type = ValueType::Int;
      break;
    case K::Payload:
      if (scope.payload == ValueType::None) throw TypeError("'payload' used but the trigger carries none");
      e.type = scope.payload;
      break;
    case K::Var: {
      auto r = scope.var ? scope.var(e.name) : std::nullopt;
      if (!r) throw TypeError("unknown variable '" + e.name + "'");
      e.var_index = r->first;
      e.type = r->second;
      break;
    }
    case K::SlotVar: {
      auto r = scope.slot_var ? scope.slot_var(e.slot, e.name) : std::nullopt;
      if (!r) throw TypeError("unknown submachine variable '" + e.slot + "." + e.name + "'");
      e.slot_index = r->first;
      e.var_index = r->second;
      e.type = scope.slot_var_type(r->first, r->second);
      break;
    }
    case K::Not:
      if (resolve(*e.lhs, scope) != ValueType::Bool) throw TypeError("'!' needs bool");
      e.type = ValueType::Bool;
      break;
    case K::Neg:
      e.type = resolve(*e.lhs, scope);
      if (!is_numeric(e.type)) throw TypeError("unary '-' needs a number");
      break;
    case K::Binary: {
      const ValueType l = resolve(*e.lhs, scope);
      const ValueType r = resolve(*e.rhs, scope);
      const std::string& op = e.op;
      if (op == "&&" || op == "||") {
        if (l != ValueType::Bool || r != ValueType::Bool) throw TypeError("'" + op + "' needs bool operands");
        e.type = ValueType::Bool;
      } else if (op == "==" || op == "!=") {
        if (!(l == r || (is_numeric(l) && is_numeric(r))))
          throw TypeError("cannot compare " + std::string(to_string(l)) + " with " + std::string(to_string(r)));
        e.type = ValueType::Bool;
      } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        if (!is_numeric(l) || !is_numeric(r)) throw TypeError("'" + op + "' needs numbers");
        e.type = ValueType::Bool;
      } else {
        if (!is_numeric(l) || !is_numeric(r)) throw TypeError("'" + op + "' needs numbers");
        e.type = (l == ValueType::Int && r == ValueType::Int) ? ValueType::Int : ValueType::Real;
      }
      break;
    }
  }
  return e.type;
}

/// Runtime bindings for evaluation.
struct EvalScope {
  const std::vector<Value>* vars = nullptr;
  const Value* payload = nullptr;
  std::int64_t now = 0;
  std::function<const Value&(int slot, int var)> slot_var;
};

// Evaluation is total on resolved expressions; division or modulo by zero yields 0.
inline Value eval(const Expr& e, const EvalScope& s) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Literal: return e.literal;
    case K::Now: return Value(s.now);
    case K::Payload: return *s.payload;
    case K::Var: return (*s.vars)[static_cast<std::size_t>(e.var_index)];
    case K::SlotVar: return s.slot_var(e.slot_index, e.var_index);
    case K::Not: return Value(!eval(*e.lhs, s).as_bool());
    case K::Neg: {
      Value v = eval(*e.lhs, s);
      if (v.type() == ValueType::Int) return Value(-v.as_int());
      return Value(-v.as_real());
    }
    case K::Binary: break;
  }
  const std::string& op = e.op;
  if (op == "&&") return Value(eval(*e.lhs, s).as_bool() && eval(*e.rhs, s).as_bool());
  if (op == "||") return Value(eval(*e.lhs, s).as_bool() || eval(*e.rhs, s).as_bool());
  const Value l = eval(*e.lhs, s);
  const Value r = eval(*e.rhs, s);
  if (op == "==" || op == "!=") {
    bool eq = (is_numeric(l.type()) && is_numeric(r.type()) && l.type() != r.type()) ? l.as_real() == r.as_real()
                                                                                       : l == r;
    return Value(op == "==" ? eq : !eq);
  }
  const bool ints = l.type() == ValueType::Int && r.type() == ValueType::Int;
  if (op == "<") return Value(ints ? l.as_int() < r.as_int() : l.as_real() < r.as_real());
  if (op == "<=") return Value(ints ? l.as_int() <= r.as_int() : l.as_real() <= r.as_real());
  if (op == ">") return Value(ints ? l.as_int() > r.as_int() : l.as_real() > r.as_real());
  if (op == ">=") return Value(ints ? l.as_int() >= r.as_int() : l.as_real() >= r.as_real());
  if (ints) {
    const std::int64_t a = l.as_int(), b = r.as_int();
    if (op == "+") return Value(a + b);
    if (op == "-") return Value(a - b);
    if (op == "*") return Value(a * b);
    if (op == "/") return Value(b == 0 ? std::int64_t{0} : a / b);
    return Value(b == 0 ? std::int64_t{0} : a % b);
  }
  const double a = l.as_real(), b = r.as_real();
  if (op == "+") return Value(a + b);
  if (op == "-") return Value(a - b);
  if (op == "*") return Value(a * b);
  if (op == "/") return Value(b == 0.0 ? 0.0 : a / b);
  return Value(b == 0.0 ? 0.0 : std::fmod(a, b));
}

}  // namespace stl4iot::sc
