#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "stl4iot/sc/engine.hpp"
#include "stl4iot/sim/trace.hpp"

namespace stl4iot::sim {

enum class ReportKind { StateChange, Command, Alarm, Power, Network };

inline const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::StateChange: return "STATE-CHANGE";
    case ReportKind::Command: return "COMMAND";
    case ReportKind::Alarm: return "ALARM";
    case ReportKind::Power: return "POWER";
    case ReportKind::Network: return "NETWORK";
  }
  return "?";
}

struct ReportEntry {
  std::int64_t t_ms = 0;
  std::string system_id;
  ReportKind kind = ReportKind::StateChange;
  std::string detail;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

using ReportLog = std::vector<ReportEntry>;

inline std::string format_entry(const ReportEntry& e) {
  return "[" + std::to_string(e.t_ms) + "] " + e.system_id + " " + to_string(e.kind) + ": " + e.detail;
}

inline std::string format_report(const ReportLog& log) {
  std::string out;
  for (const auto& e : log) out += format_entry(e) + "\n";
  return out;
}

inline void write_report(const ReportLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw TraceError(TraceErrorKind::IoFailure, "cannot write " + path);
  f << format_report(log);
  if (!f.flush()) throw TraceError(TraceErrorKind::IoFailure, "write failed: " + path);
}

/// Report name of a machine: its slot path, or "hub" for the root.
inline std::string machine_id(const std::string& path) { return path.empty() ? "hub" : path; }

/// Report id of a machine: base units report under their system.
inline std::string report_id(const std::string& path) {
  if (path == "base") return machine_id("");
  if (path.ends_with("/base")) return path.substr(0, path.size() - 5);
  return machine_id(path);
}

namespace detail {

inline bool in_region(const std::string& path, const std::string& region) {
  return path.starts_with(region + "/") || path.find("/" + region + "/") != std::string::npos;
}

// "a/b/c/x" -> "a/b/c" ; longest common '/'-bounded prefix of two state paths.
inline std::string common_parent(const std::string& a, const std::string& b) {
  std::size_t cut = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size() && a[i] == b[i]; ++i)
    if (a[i] == '/') cut = i;
  return a.substr(0, cut);
}

inline std::string payload_suffix(const sc::Value& v) {
  return v.type() == sc::ValueType::None ? "" : "(" + v.to_string() + ")";
}

}  // namespace detail

/// Report entries for one engine step: state changes (self-loops and local
/// reactions omitted), power shedding, alarms and other base-unit signals.
inline void append_step(ReportLog& log, const sc::StepReport& rep) {
  for (const auto& f : rep.fired) {
    if (f.target.empty() || f.target == f.source) continue;
    ReportKind kind = ReportKind::StateChange;
    if (detail::in_region(f.source, "Network")) kind = ReportKind::Network;
    else if (detail::in_region(f.source, "Power") || detail::in_region(f.source, "HubPowerManager")) kind = ReportKind::Power;
    const std::string parent = detail::common_parent(f.source, f.target);
    const std::size_t skip = parent.empty() ? 0 : parent.size() + 1;
    log.push_back({f.t_ms, report_id(f.machine), kind,
                   parent + (parent.empty() ? "" : ": ") + f.source.substr(skip) + " -> " + f.target.substr(skip)});
  }
  for (const auto& e : rep.emitted) {
    if (e.kind == sc::Emission::Kind::Send && e.event == "shed") {
      log.push_back({e.t_ms, machine_id(e.from), ReportKind::Power, "shed " + e.to});
      continue;
    }
    const bool from_base = e.from == "base" || e.from.ends_with("/base");
    if (e.kind != sc::Emission::Kind::Emit || !from_base) continue;
    if (e.event == "emergency" || e.event == "alarm_cleared")
      log.push_back({e.t_ms, report_id(e.from), ReportKind::Alarm, e.event});
    else
      log.push_back({e.t_ms, report_id(e.from), ReportKind::StateChange, "signal " + e.event + detail::payload_suffix(e.payload)});
  }
}

}  // namespace stl4iot::sim
