#pragma once

// Scenario files: home configuration plus the environment's signal generators.

#include <fstream>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "stl4iot/home/smart_home.hpp"
#include "stl4iot/sim/simulation.hpp"
#include "stl4iot/sim/trace.hpp"

namespace stl4iot::sim {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name = "home";
  home::HomeSpec home;
  std::vector<SignalGenerator> generators;
  SimOptions options;
};

namespace detail {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(std::string("bad value for '") + key + "'");
    }
  }

  template <class T>
  T req(const char* key) {
    if (!j_.contains(key)) fail(std::string("missing '") + key + "'");
    T out{};
    opt(key, out);
    return out;
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
  }

  [[noreturn]] void fail(const std::string& why) const { throw ScenarioError(where_ + ": " + why); }
  const std::string& where() const { return where_; }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline void read_fire(Reader r, home::FireConfig& c) {
  r.opt("carbon", c.carbon);
  r.opt("smoke", c.smoke);
  r.opt("heat", c.heat);
  r.opt("warn1_ms", c.warn1_ms);
  r.opt("warn2_ms", c.warn2_ms);
  r.opt("rated_kw", c.rated_kw);
  r.opt("sensor_period_ms", c.sensor_period_ms);
  r.done();
}

inline void read_tv(Reader r, home::TvConfig& c) {
  r.opt("inactivity_ms", c.inactivity_ms);
  r.opt("prompt_timeout_ms", c.prompt_timeout_ms);
  r.opt("channels", c.channels);
  r.opt("inputs", c.inputs);
  r.opt("rated_kw", c.rated_kw);
  r.opt("sensor_period_ms", c.sensor_period_ms);
  r.done();
}

inline void read_microwave(Reader r, home::MicrowaveConfig& c) {
  r.opt("heat_threshold", c.heat_threshold);
  r.opt("min_weight", c.min_weight);
  r.opt("standby_timeout_ms", c.standby_timeout_ms);
  r.opt("rated_kw", c.rated_kw);
  r.opt("sensor_period_ms", c.sensor_period_ms);
  r.done();
}

inline void read_lights(Reader r, home::LightsConfig& c) {
  r.opt("inactivity_ms", c.inactivity_ms);
  r.opt("dim_levels", c.dim_levels);
  r.opt("rated_kw", c.rated_kw);
  r.opt("sensor_period_ms", c.sensor_period_ms);
  r.done();
}

inline SignalGenerator read_generator(Reader r) {
  SignalGenerator g;
  g.system_id = r.req<std::string>("system");
  g.signal = r.req<std::string>("signal");
  const auto dist = r.req<std::string>("distribution");
  r.opt("period_ms", g.period_ms);
  r.opt("start_ms", g.start_ms);
  r.opt("resolution", g.resolution);
  if (dist == "constant") {
    g.kind = Distribution::Constant;
    g.a = r.req<double>("value");
  } else if (dist == "uniform") {
    g.kind = Distribution::Uniform;
    g.a = r.req<double>("min");
    g.b = r.req<double>("max");
  } else if (dist == "normal") {
    g.kind = Distribution::Normal;
    g.a = r.req<double>("mean");
    g.b = r.req<double>("stddev");
  } else if (dist == "bernoulli") {
    g.kind = Distribution::Bernoulli;
    g.a = r.req<double>("p");
  } else {
    r.fail("unknown distribution '" + dist + "'");
  }
  r.done();
  return g;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, const std::string& where = "scenario") {
  Scenario s;
  detail::Reader r(j, where);
  r.opt("name", s.name);
  r.opt("sample_period_ms", s.options.sample_period_ms);
  if (const auto* h = r.child("home")) {
    detail::Reader hr(*h, where + ".home");
    hr.opt("n_lights", s.home.n_lights);
    hr.opt("power_threshold_kw", s.home.power_threshold_kw);
    hr.opt("lights_threshold_kw", s.home.lights_threshold_kw);
    if (const auto* x = hr.child("fire")) detail::read_fire({*x, where + ".home.fire"}, s.home.fire);
    if (const auto* x = hr.child("tv")) detail::read_tv({*x, where + ".home.tv"}, s.home.tv);
    if (const auto* x = hr.child("microwave")) detail::read_microwave({*x, where + ".home.microwave"}, s.home.microwave);
    if (const auto* x = hr.child("lights")) detail::read_lights({*x, where + ".home.lights"}, s.home.lights);
    hr.done();
    if (s.home.n_lights < 1 || s.home.n_lights > 64) hr.fail("n_lights must be within 1..64");
  }
  if (const auto* env = r.child("environment")) {
    detail::Reader er(*env, where + ".environment");
    if (const auto* gens = er.child("generators")) {
      if (!gens->is_array()) er.fail("'generators' must be an array");
      for (std::size_t i = 0; i < gens->size(); ++i)
        s.generators.push_back(detail::read_generator({(*gens)[i], where + ".environment.generators[" + std::to_string(i) + "]"}));
    }
    er.done();
  }
  r.done();
  if (s.options.sample_period_ms <= 0) throw ScenarioError(where + ": sample_period_ms must be positive");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot read scenario " + path);
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) throw ScenarioError(path + ": not valid JSON");
  return parse_scenario(j, path);
}

inline EnvConfig env_config(const Scenario& s, std::int64_t duration_ms) { return {duration_ms, s.generators}; }

inline std::shared_ptr<const sc::CompiledChart> compile_home(const Scenario& s) {
  return sc::validate_definition(home::build_smart_home(s.home));
}

/// Builds the home, generates the trace and runs it to `duration_ms`.
inline std::unique_ptr<Simulation> run_headless(const Scenario& s, std::uint64_t seed, std::int64_t duration_ms,
                                                std::vector<ScheduledCommand> script = {}) {
  auto sim = std::make_unique<Simulation>(compile_home(s), generate_trace(seed, env_config(s, duration_ms)), std::move(script),
                                          s.options);
  sim->start();
  sim->run_until(duration_ms);
  return sim;
}

}  // namespace stl4iot::sim
