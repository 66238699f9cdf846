#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "stl4iot/service/http.hpp"
#include "stl4iot/sim/scenario.hpp"

using namespace stl4iot;
using namespace stl4iot::sim;

namespace {

Scenario scenario() { return load_scenario(STL4IOT_SCENARIO_DIR "/default.json"); }

// Service plus an HTTP server on an ephemeral loopback port.
struct Live {
  Scenario sc = scenario();
  std::unique_ptr<service::Service> svc;
  httplib::Server srv;
  std::thread http;
  int port = 0;

  Live(std::int64_t duration_ms, Speed speed, std::uint64_t seed = 11) {
    auto s = std::make_unique<Simulation>(compile_home(sc), generate_trace(seed, env_config(sc, duration_ms)),
                                          std::vector<ScheduledCommand>{}, sc.options);
    svc = std::make_unique<service::Service>(std::move(s), service::ServiceOptions{duration_ms, speed});
    service::mount(srv, *svc);
    port = srv.bind_to_any_port("127.0.0.1");
    http = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Live() {
    srv.stop();
    http.join();
    svc->stop();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
  httplib::Result post(const Json& body) const { return client().Post("/command", body.dump(), "application/json"); }
};

Json cmd(const char* kind, std::string target = "", Json args = Json::object()) {
  return {{"kind", kind}, {"target", std::move(target)}, {"args", std::move(args)}};
}

}  // namespace

TEST(Service, EndpointsBeforeStart) {
  Live l(10'000, {false, 1.0});
  auto c = l.client();
  auto sys = c.Get("/systems");
  ASSERT_TRUE(sys);
  EXPECT_EQ(sys->status, 200);
  auto j = Json::parse(sys->body);
  std::vector<std::string> ids;
  for (const auto& e : j) ids.push_back(e["id"]);
  EXPECT_NE(std::find(ids.begin(), ids.end(), "fire"), ids.end());
  EXPECT_NE(std::find(ids.begin(), ids.end(), "lights/light_3"), ids.end());

  auto st = c.Get("/state");
  ASSERT_TRUE(st);
  auto s = Json::parse(st->body);
  EXPECT_EQ(s["t_ms"], 0);
  EXPECT_TRUE(s["well_formed"].get<bool>());

  // the loop has not been started
  auto r = l.post(cmd("toggle_system", "tv"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 503);
  EXPECT_EQ(Json::parse(r->body)["error"], "SimulationNotRunning");
}

TEST(Service, CommandsAndErrors) {
  Live l(600'000, {false, 1.0});
  l.svc->start();

  auto ok = l.post(cmd("toggle_system", "tv"));
  ASSERT_TRUE(ok);
  ASSERT_EQ(ok->status, 200);
  auto res = Json::parse(ok->body);
  EXPECT_TRUE(res["accepted"].get<bool>());
  EXPECT_EQ(res["seq"], 1);
  EXPECT_EQ(res["status"]["status"], "on");

  auto fire = l.post(cmd("toggle_system", "fire"));
  ASSERT_EQ(fire->status, 200);
  EXPECT_FALSE(Json::parse(fire->body)["accepted"].get<bool>());
  EXPECT_EQ(Json::parse(fire->body)["reason"], "not-hub-toggleable");

  auto bad = l.client().Post("/command", "{not json", "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(l.post(Json{{"kind", "warp_drive"}})->status, 400);
  EXPECT_EQ(l.post(cmd("toggle_system", "garage"))->status, 404);

  auto st = Json::parse(l.client().Get("/state")->body);
  EXPECT_EQ(st["systems"]["tv"]["status"], "on");

  auto rep = l.client().Get("/report");
  EXPECT_NE(rep->body.find("tv COMMAND: toggle_system accepted"), std::string::npos);

  l.svc->stop();
  EXPECT_EQ(l.post(cmd("toggle_system", "tv"))->status, 503);
}

TEST(Service, TelemetryStreamIsGapless) {
  Live l(600'000, {false, 200.0});
  l.svc->start();
  std::string body;
  auto r = l.client().Get("/telemetry?from=0&limit=12", [&](const char* d, std::size_t n) {
    body.append(d, n);
    return true;
  });
  ASSERT_TRUE(r);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/x-ndjson");
  std::istringstream in(body);
  std::string line;
  std::vector<std::int64_t> ts;
  while (std::getline(in, line)) ts.push_back(Json::parse(line)["t_ms"].get<std::int64_t>());
  ASSERT_EQ(ts.size(), 12u);
  for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_LT(ts[i - 1], ts[i]);
  // every whole-second tick up to the last sample is present
  for (std::int64_t t = 0; t <= ts.back(); t += 1000) EXPECT_NE(std::find(ts.begin(), ts.end(), t), ts.end()) << t;

  EXPECT_EQ(l.client().Get("/telemetry?from=abc")->status, 400);
}

TEST(Service, StreamEndsWithSession) {
  Live l(5'000, {true, 1.0});
  l.svc->start();
  l.svc->wait();
  auto r = l.client().Get("/telemetry?from=0");
  ASSERT_TRUE(r);
  std::size_t n = std::count(r->body.begin(), r->body.end(), '\n');
  EXPECT_EQ(n, l.svc->simulation().samples().size());
  EXPECT_EQ(l.svc->simulation().now(), 5'000);
}

TEST(Service, LiveSessionReplaysIdentically) {
  const std::int64_t dur = 30'000;
  Live l(dur, {false, 20.0}, 5);
  l.svc->start();
  l.post(cmd("toggle_system", "tv"));
  l.post(cmd("tv_channel", "tv", {{"step", "up"}}));
  l.post(cmd("toggle_system", "lights/light_2"));
  l.post(cmd("set_speed", "", {{"speed", 40}}));
  l.post(cmd("lights_dim", "lights/light_2"));
  l.post(cmd("mw_door", "microwave", {{"open", true}}));
  l.svc->wait();
  ASSERT_FALSE(l.svc->failure());

  const auto& live = l.svc->simulation();
  ASSERT_EQ(live.applied().size(), 6u);
  auto replay = run_headless(l.sc, 5, dur, live.applied());
  EXPECT_EQ(format_report(replay->report()), format_report(live.report()));
  EXPECT_EQ(format_telemetry(replay->samples()), format_telemetry(live.samples()));
}

TEST(Service, PacingFollowsSpeed) {
  // 3 s of virtual time at 10x takes at least 300 ms of wall time; max does not wait
  auto elapsed = [](Speed sp) {
    Live l(3'000, sp);
    const auto t0 = std::chrono::steady_clock::now();
    l.svc->start();
    l.svc->wait();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  EXPECT_GE(elapsed({false, 10.0}), 290.0);
  EXPECT_LT(elapsed({true, 1.0}), 250.0);
}
