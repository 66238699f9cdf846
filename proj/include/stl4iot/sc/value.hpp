#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>

namespace stl4iot::sc {

enum class ValueType { None, Bool, Int, Real, String };

inline std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::None: return "none";
    case ValueType::Bool: return "bool";
    case ValueType::Int: return "int";
    case ValueType::Real: return "real";
    case ValueType::String: return "string";
  }
  return "none";
}

inline std::optional<ValueType> parse_value_type(std::string_view s) {
  if (s == "none") return ValueType::None;
  if (s == "bool") return ValueType::Bool;
  if (s == "int") return ValueType::Int;
  if (s == "real") return ValueType::Real;
  if (s == "string") return ValueType::String;
  return std::nullopt;
}

inline bool is_numeric(ValueType t) { return t == ValueType::Int || t == ValueType::Real; }

// An int may be stored where a real is expected; nothing else converts implicitly.
inline bool assignable(ValueType to, ValueType from) {
  return to == from || (to == ValueType::Real && from == ValueType::Int);
}

/// Runtime value of a statechart variable, literal or event payload.
class Value {
 public:
  Value() = default;
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}

  ValueType type() const {
    switch (v_.index()) {
      case 1: return ValueType::Bool;
      case 2: return ValueType::Int;
      case 3: return ValueType::Real;
      case 4: return ValueType::String;
      default: return ValueType::None;
    }
  }

  bool is_none() const { return v_.index() == 0; }
  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }

  double as_real() const {
    if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
    return std::get<double>(v_);
  }

  /// Converts to `t` where `assignable(t, type())` holds.
  Value coerced(ValueType t) const {
    if (t == ValueType::Real && type() == ValueType::Int) return Value(as_real());
    return *this;
  }

  static Value default_for(ValueType t) {
    switch (t) {
      case ValueType::Bool: return Value(false);
      case ValueType::Int: return Value(std::int64_t{0});
      case ValueType::Real: return Value(0.0);
      case ValueType::String: return Value(std::string{});
      case ValueType::None: break;
    }
    return {};
  }

  friend bool operator==(const Value&, const Value&) = default;

  std::string to_string() const {
    switch (type()) {
      case ValueType::None: return "none";
      case ValueType::Bool: return as_bool() ? "true" : "false";
      case ValueType::Int: return std::to_string(as_int());
      case ValueType::Real: return format_real(std::get<double>(v_));
      case ValueType::String: return as_string();
    }
    return {};
  }

  /// Shortest round-trippable decimal.
  static std::string format_real(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    if (ec != std::errc{}) throw std::runtime_error("cannot format real");
    return std::string(buf, end);
  }

 private:
  std::variant<std::monostate, bool, std::int64_t, double, std::string> v_;
};

}  // namespace stl4iot::sc
