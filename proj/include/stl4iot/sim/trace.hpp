#pragma once

// Seeded sensor traces and their CSV form.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stl4iot/sc/value.hpp"
#include "stl4iot/sim/prng.hpp"

namespace stl4iot::sim {

enum class TraceErrorKind { InvalidConfig, IoFailure, MalformedLine };

class TraceError : public std::runtime_error {
 public:
  TraceError(TraceErrorKind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}
  TraceErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  TraceErrorKind kind_;
  std::size_t line_;
};

struct TraceEntry {
  std::int64_t t_ms = 0;
  std::string system_id;
  std::string signal;
  sc::Value value;  // bool or real

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct SensorTrace {
  std::uint64_t seed = 0;
  std::vector<TraceEntry> entries;

  friend bool operator==(const SensorTrace&, const SensorTrace&) = default;
};

enum class Distribution { Constant, Uniform, Normal, Bernoulli };

struct SignalGenerator {
  std::string system_id;
  std::string signal;
  Distribution kind = Distribution::Constant;
  double a = 0.0;  // constant: value; uniform: min; normal: mean; bernoulli: p
  double b = 0.0;  // uniform: max; normal: stddev
  std::int64_t period_ms = 1000;
  std::int64_t start_ms = 0;    // first emission at start_ms + period_ms
  double resolution = 0.01;     // real values are rounded to this step; 0 keeps full precision
};

struct EnvConfig {
  std::int64_t duration_ms = 60'000;
  std::vector<SignalGenerator> generators;
};

inline void check(const EnvConfig& c) {
  if (c.duration_ms <= 0) throw TraceError(TraceErrorKind::InvalidConfig, "duration_ms must be positive");
  for (const auto& g : c.generators) {
    const std::string who = g.system_id + "." + g.signal;
    if (g.period_ms <= 0) throw TraceError(TraceErrorKind::InvalidConfig, who + ": period_ms must be positive");
    if (g.start_ms < 0) throw TraceError(TraceErrorKind::InvalidConfig, who + ": start_ms must not be negative");
    if (g.system_id.empty() || g.signal.empty()) throw TraceError(TraceErrorKind::InvalidConfig, "generator needs system and signal");
    if (g.system_id.find(',') != std::string::npos || g.signal.find(',') != std::string::npos)
      throw TraceError(TraceErrorKind::InvalidConfig, who + ": names must not contain commas");
    if (g.kind == Distribution::Uniform && g.b < g.a) throw TraceError(TraceErrorKind::InvalidConfig, who + ": max below min");
    if (g.kind == Distribution::Normal && g.b < 0) throw TraceError(TraceErrorKind::InvalidConfig, who + ": negative stddev");
    if (g.kind == Distribution::Bernoulli && (g.a < 0 || g.a > 1))
      throw TraceError(TraceErrorKind::InvalidConfig, who + ": probability outside [0, 1]");
    if (g.resolution < 0) throw TraceError(TraceErrorKind::InvalidConfig, who + ": negative resolution");
  }
}

/// Every generator draws from its own xoshiro256** stream; stream i takes the
/// i-th four words of a splitmix64 sequence started at `seed`.
inline SensorTrace generate_trace(std::uint64_t seed, const EnvConfig& config) {
  check(config);
  SensorTrace trace;
  trace.seed = seed;
  SplitMix64 sm(seed);
  for (const auto& g : config.generators) {
    Xoshiro256ss rng(sm);
    auto quantize = [&](double v) { return g.resolution > 0 ? std::round(v / g.resolution) * g.resolution : v; };
    for (std::int64_t t = g.start_ms + g.period_ms; t <= config.duration_ms; t += g.period_ms) {
      sc::Value v;
      switch (g.kind) {
        case Distribution::Constant: v = sc::Value(g.a); break;
        case Distribution::Uniform: v = sc::Value(quantize(rng.uniform(g.a, g.b))); break;
        case Distribution::Normal: v = sc::Value(quantize(rng.normal(g.a, g.b))); break;
        case Distribution::Bernoulli: v = sc::Value(rng.bernoulli(g.a)); break;
      }
      trace.entries.push_back({t, g.system_id, g.signal, std::move(v)});
    }
  }
  std::stable_sort(trace.entries.begin(), trace.entries.end(),
                   [](const TraceEntry& x, const TraceEntry& y) { return x.t_ms < y.t_ms; });
  return trace;
}

inline constexpr const char* kTraceHeader = "t_ms,system_id,signal,value";

inline std::string format_trace(const SensorTrace& trace) {
  std::string out = "# seed=" + std::to_string(trace.seed) + "\n" + kTraceHeader + "\n";
  for (const auto& e : trace.entries)
    out += std::to_string(e.t_ms) + "," + e.system_id + "," + e.signal + "," + e.value.to_string() + "\n";
  return out;
}

namespace detail {

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

}  // namespace detail

inline SensorTrace parse_trace(std::istream& in) {
  SensorTrace trace;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  auto bad = [&](const std::string& why) {
    return TraceError(TraceErrorKind::MalformedLine, "line " + std::to_string(n) + ": " + why, n);
  };
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') throw bad("CR line ending");
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view key = "# seed=";
      if (std::string_view(line).starts_with(key) && !detail::parse_number(std::string_view(line).substr(key.size()), trace.seed))
        throw bad("bad seed");
      continue;
    }
    if (!header) {
      if (line != kTraceHeader) throw bad("expected header '" + std::string(kTraceHeader) + "'");
      header = true;
      continue;
    }
    auto f = detail::split(line, ',');
    if (f.size() != 4) throw bad("expected 4 fields");
    TraceEntry e;
    if (!detail::parse_number(f[0], e.t_ms) || e.t_ms < 0) throw bad("non-numeric t_ms");
    if (f[1].empty() || f[2].empty()) throw bad("empty system or signal");
    e.system_id = f[1];
    e.signal = f[2];
    if (f[3] == "true" || f[3] == "false") {
      e.value = sc::Value(f[3] == "true");
    } else {
      double d = 0;
      if (!detail::parse_number(f[3], d)) throw bad("value is neither bool nor number");
      e.value = sc::Value(d);
    }
    if (!trace.entries.empty() && e.t_ms < trace.entries.back().t_ms) throw bad("entries out of time order");
    trace.entries.push_back(std::move(e));
  }
  if (!header) throw TraceError(TraceErrorKind::MalformedLine, "missing header", n);
  return trace;
}

inline void write_trace(const SensorTrace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw TraceError(TraceErrorKind::IoFailure, "cannot write " + path);
  f << format_trace(trace);
  if (!f.flush()) throw TraceError(TraceErrorKind::IoFailure, "write failed: " + path);
}

inline SensorTrace read_trace(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TraceError(TraceErrorKind::IoFailure, "cannot read " + path);
  return parse_trace(f);
}

}  // namespace stl4iot::sim
