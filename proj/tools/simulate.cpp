// stl4iot-sim: runs the smart home against a generated or recorded sensor trace.
// Headless by default; --serve exposes the live session over HTTP.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "stl4iot/service/http.hpp"
#include "stl4iot/sim/scenario.hpp"

using namespace stl4iot;

namespace {

std::atomic<bool> g_interrupted{false};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure("cannot write " + path);
  f << text;
  if (!f.flush()) throw Failure("write failed: " + path);
}

std::vector<sim::ScheduledCommand> read_script(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Failure("cannot read commands " + path);
  try {
    return sim::parse_script(f);
  } catch (const sim::CommandError& e) {
    throw Failure(path + ": " + e.what());
  }
}

sim::Speed parse_speed(const std::string& s) {
  if (s == "max") return {true, 1.0};
  std::size_t pos = 0;
  double f = 0;
  try {
    f = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !(f > 0)) throw Failure("--speed must be a positive number or 'max', got '" + s + "'");
  return {false, f};
}

std::pair<std::string, int> parse_addr(const std::string& a) {
  const auto colon = a.rfind(':');
  if (colon == std::string::npos) throw Failure("--serve wants host:port, got '" + a + "'");
  try {
    std::size_t pos = 0;
    const int port = std::stoi(a.substr(colon + 1), &pos);
    if (pos == a.size() - colon - 1 && port >= 0 && port < 65536) return {a.substr(0, colon), port};
  } catch (const std::exception&) {
  }
  throw Failure("--serve has a bad port: '" + a + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate the STL4IoT smart home"};
  std::string scenario_path, report_path, trace_in, trace_out, commands_in, commands_out, telemetry_path, serve, speed = "1";
  std::uint64_t seed = 0;
  std::int64_t duration_ms = 0;
  app.add_option("--scenario", scenario_path, "Scenario JSON")->required();
  app.add_option("--seed", seed, "Environment PRNG seed");
  app.add_option("--duration-ms", duration_ms, "Virtual duration in ms")->required()->check(CLI::PositiveNumber);
  app.add_option("--report", report_path, "Report log output")->required();
  app.add_option("--trace", trace_in, "Replay a recorded sensor trace instead of generating one")->excludes("--seed");
  app.add_option("--trace-out", trace_out, "Write the sensor trace used");
  app.add_option("--commands", commands_in, "Scripted commands (JSONL)");
  app.add_option("--commands-out", commands_out, "Write applied commands (JSONL); default <report>.commands.jsonl when serving");
  app.add_option("--telemetry", telemetry_path, "Telemetry output (JSONL); default <report>.telemetry.jsonl");
  app.add_option("--serve", serve, "Serve the live session on host:port");
  app.add_option("--speed", speed, "Virtual ms per wall ms when serving, or 'max'");
  CLI11_PARSE(app, argc, argv);

  if (telemetry_path.empty()) telemetry_path = report_path + ".telemetry.jsonl";
  if (commands_out.empty() && !serve.empty()) commands_out = report_path + ".commands.jsonl";

  try {
    sim::Scenario sc = sim::load_scenario(scenario_path);
    sim::SensorTrace trace;
    if (!trace_in.empty()) {
      try {
        trace = sim::read_trace(trace_in);
      } catch (const sim::TraceError& e) {
        throw Failure(trace_in + ": " + e.what());
      }
      seed = trace.seed;
    } else {
      trace = sim::generate_trace(seed, sim::env_config(sc, duration_ms));
    }
    if (!trace_out.empty()) sim::write_trace(trace, trace_out);
    auto script = commands_in.empty() ? std::vector<sim::ScheduledCommand>{} : read_script(commands_in);
    auto sim_ptr = std::make_unique<sim::Simulation>(sim::compile_home(sc), std::move(trace), std::move(script), sc.options);
    sim_ptr->start();

    const sim::Simulation* done = nullptr;
    std::unique_ptr<service::Service> svc;
    httplib::Server srv;
    std::thread http;
    if (serve.empty()) {
      sim_ptr->run_until(duration_ms);
      done = sim_ptr.get();
    } else {
      const auto [host, port] = parse_addr(serve);
      svc = std::make_unique<service::Service>(std::move(sim_ptr), service::ServiceOptions{duration_ms, parse_speed(speed)});
      service::mount(srv, *svc);
      if (!srv.bind_to_port(host, port)) throw Failure("cannot listen on " + serve);
      http = std::thread([&] { srv.listen_after_bind(); });
      std::signal(SIGINT, [](int) { g_interrupted = true; });
      std::signal(SIGTERM, [](int) { g_interrupted = true; });
      std::cerr << "serving on http://" << serve << "\n";
      svc->start();
      while (svc->running() && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      svc->stop();
      srv.stop();
      http.join();
      if (auto f = svc->failure()) throw Failure(*f);
      done = &svc->simulation();
      if (done->now() < duration_ms)
        std::cerr << "stopped at t=" << done->now() << " ms; replay with --duration-ms " << done->now() << "\n";
    }

    sim::write_report(done->report(), report_path);
    write_file(telemetry_path, sim::format_telemetry(done->samples()));
    if (!commands_out.empty()) write_file(commands_out, sim::format_script(done->applied()));
    const auto last = done->snapshot();
    std::cout << "t=" << done->now() << " ms seed=" << seed << " report=" << done->report().size()
              << " samples=" << done->samples().size() << " commands=" << done->applied().size()
              << " kwh=" << last.total_kwh << "\n";
  } catch (const std::exception& e) {
    std::cerr << "stl4iot-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
