#include <gtest/gtest.h>

#include <algorithm>

#include "stl4iot/sc/engine.hpp"
#include "stl4iot/templates/hub.hpp"
#include "stl4iot/templates/iot_system.hpp"
#include "stl4iot/templates/power_policy.hpp"

using namespace stl4iot;
using namespace stl4iot::templates;
using sc::MachineInstance;
using sc::Value;

namespace {

MachineInstance instance(const sc::StatechartDef& d) { return MachineInstance(sc::validate_definition(d)); }

std::size_t count_raised(const sc::StepReport& r, const std::string& ev) {
  return static_cast<std::size_t>(
      std::count_if(r.raised.begin(), r.raised.end(), [&](const sc::RaisedEvent& e) { return e.event == ev; }));
}

// A base unit with nothing but a lamp.
std::shared_ptr<const sc::StatechartDef> lamp_base() {
  using namespace sc::build;
  auto d = std::make_shared<sc::StatechartDef>();
  d->name = "BaseLamp";
  d->events = {in("power_on"), in("power_off"), in("actuate", sc::ValueType::Bool)};
  d->variables = {var("lit", sc::ValueType::Bool)};
  d->root = {region("main", {composite("BaseLamp", region("r", {basic("Dark", true), basic("Bright", false, {"lit := true"},
                                                                                         {"lit := false"})}),
                                       true)})};
  d->transitions = {tr("Dark", "Bright", on("actuate"), "payload"), tr("Bright", "Dark", on("actuate"), "!payload"),
                    tr("Bright", "Dark", on("power_off"))};
  return d;
}

SystemParams lamp_params(const std::string& name, double kw) {
  SystemParams p;
  p.name = name;
  SensorParams s;
  s.kind = SensorKind::Ultrasonic;
  p.sensors = {s};
  p.actuator.on_actions = {"send base.actuate(true)"};
  p.actuator.off_actions = {"send base.actuate(false)"};
  p.power.rated_kw = kw;
  return p;
}

std::shared_ptr<const sc::StatechartDef> lamp_system(const std::string& name, double kw) {
  return std::make_shared<const sc::StatechartDef>(assemble_iot_system(lamp_base(), lamp_params(name, kw)));
}

}  // namespace

TEST(Sensor, DefaultEntryAndToggle) {
  auto m = instance(build_sensor());
  auto rep = m.enter();
  EXPECT_TRUE(m.is_active("NoActivitySensed"));
  EXPECT_TRUE(m.read_var("reading").as_bool());
  m.dispatch({"toggle", {}});
  EXPECT_TRUE(m.is_active("Sensor/Off"));
  EXPECT_FALSE(m.read_var("reading").as_bool());
}

TEST(Sensor, PeriodicReadingsFollowActivity) {
  // Same stimulus, driven once with one large advance and once 1 ms at a time.
  auto run = [](bool fine) {
    auto m = instance(build_sensor());
    m.enter();
    std::vector<std::pair<std::int64_t, bool>> readings;
    auto collect = [&](const sc::StepReport& r) {
      for (const auto& e : r.raised)
        if (e.event == "SensorReading") readings.emplace_back(e.t_ms, e.payload.as_bool());
    };
    auto advance = [&](std::int64_t ms) {
      if (fine)
        for (std::int64_t i = 0; i < ms; ++i) collect(m.advance_time(1));
      else
        collect(m.advance_time(ms));
    };
    advance(1200);
    collect(m.dispatch({"sense", Value(5.0)}));
    advance(300);
    return readings;
  };
  const auto coarse = run(false);
  EXPECT_EQ(coarse, run(true));
  ASSERT_EQ(coarse.size(), 3u);
  EXPECT_EQ(coarse[0], std::make_pair(std::int64_t{500}, false));
  EXPECT_EQ(coarse[1], std::make_pair(std::int64_t{1000}, false));
  EXPECT_EQ(coarse[2], std::make_pair(std::int64_t{1500}, true));
}

TEST(Sensor, InjectMatchesDispatch) {
  auto a = instance(build_sensor());
  auto b = instance(build_sensor());
  a.enter();
  b.enter();
  auto ra = a.inject("activity", true);
  auto rb = b.dispatch({"sense", Value(1.0)});
  EXPECT_TRUE(a.is_active("ActivitySensed"));
  EXPECT_EQ(ra.config_after, rb.config_after);
}

TEST(Sensor, SimulatedCounterEnablesTimedActivity) {
  SensorParams p;
  p.simulated_activity_after_ms = 700;
  auto m = instance(build_sensor(p));
  m.enter();
  m.advance_time(699);
  EXPECT_TRUE(m.is_active("NoActivitySensed"));
  m.advance_time(1);
  EXPECT_TRUE(m.is_active("ActivitySensed"));
}

TEST(Sensor, InvalidPeriodRejected) {
  SensorParams p;
  p.period_ms = 0;
  EXPECT_THROW(build_sensor(p), TemplateError);
}

TEST(Controller, OneActuationPerStimulus) {
  auto m = instance(build_controller());
  m.enter();
  EXPECT_TRUE(m.is_active("WaitingforSensorData"));
  EXPECT_TRUE(m.advance_time(100000).fired.empty());
  auto r1 = m.dispatch({"SensorsTriggered", true});
  auto r2 = m.dispatch({"SensorsTriggered", false});
  EXPECT_EQ(count_raised(r1, "ActuatorTriggered"), 1u);
  EXPECT_EQ(count_raised(r2, "ActuatorTriggered"), 1u);
  EXPECT_EQ(r1.raised[0].payload, Value(true));
  EXPECT_EQ(r2.raised[0].payload, Value(false));
  EXPECT_TRUE(m.is_active("WaitingforSensorData"));
}

TEST(Actuator, FollowsTriggerValues) {
  auto m = instance(build_actuator());
  m.enter();
  EXPECT_TRUE(m.is_active("StandBy"));
  EXPECT_TRUE(m.dispatch({"ActuatorTriggered", false}).fired.empty());
  std::vector<std::string> path;
  for (bool v : {true, false, true}) {
    m.dispatch({"ActuatorTriggered", v});
    path.push_back(m.is_active("ActuatingDevice") ? "Actuating" : "StandBy");
  }
  EXPECT_EQ(path, (std::vector<std::string>{"Actuating", "StandBy", "Actuating"}));
}

TEST(Network, ConnectTimeoutAndOff) {
  NetworkParams p;
  p.timeout_period_ms = 10000;
  auto m = instance(build_network_wifi(p));
  m.enter();
  EXPECT_TRUE(m.is_active("connectingToServer"));
  m.advance_time(p.connect_ms);
  EXPECT_TRUE(m.is_active("connected"));
  EXPECT_TRUE(m.read_var("online").as_bool());
  auto rep = m.advance_time(p.timeout_period_ms);
  ASSERT_FALSE(rep.fired.empty());
  EXPECT_EQ(rep.fired[0].target.substr(rep.fired[0].target.rfind('/') + 1), "connectingToServer");
  EXPECT_EQ(rep.fired[0].t_ms, p.connect_ms + p.timeout_period_ms);
  EXPECT_TRUE(m.is_active("connectingToServer"));
  m.advance_time(p.connect_ms);
  m.inject("link_ok", false);
  EXPECT_TRUE(m.is_active("failed"));
  EXPECT_FALSE(m.read_var("online").as_bool());
  m.inject("link_ok", true);
  m.advance_time(p.reconnect_delay_ms + p.connect_ms);
  EXPECT_TRUE(m.is_active("connected"));
  m.dispatch({"off", {}});
  EXPECT_TRUE(m.is_active("Network/Off"));
  EXPECT_FALSE(m.read_var("online").as_bool());
}

TEST(Power, EnergyIntegration) {
  auto m = instance(build_power({2.0}));
  m.enter();
  EXPECT_TRUE(m.is_active("NoPowerConsumed"));
  EXPECT_FALSE(m.read_var("consuming").as_bool());
  EXPECT_DOUBLE_EQ(m.read_var("draw_kw").as_real(), 0.0);
  m.dispatch({"device_on", {}});
  EXPECT_DOUBLE_EQ(m.read_var("draw_kw").as_real(), 2.0);
  m.advance_time(30 * 60 * 1000);
  m.dispatch({"device_off", {}});
  EXPECT_NEAR(m.read_var("energy_kwh").as_real(), 1.0, 1e-12);
}

TEST(Power, PiecewiseMatchesMillisecondOracle) {
  auto m = instance(build_power({1.2}));
  m.enter();
  double oracle = 0.0;
  const std::int64_t ten = 10 * 60 * 1000;
  for (int phase = 0; phase < 3; ++phase) {
    const bool on = phase != 1;
    m.dispatch({on ? "device_on" : "device_off", {}});
    m.advance_time(ten);
    if (on)
      for (std::int64_t i = 0; i < ten; ++i) oracle += 1.2 / 3600000.0;
  }
  EXPECT_NEAR(live_energy_kwh(m), 0.4, 1e-12);
  EXPECT_NEAR(live_energy_kwh(m), oracle, 1e-9 * oracle);
}

TEST(PhysicalEntity, MotionDetectorActuatesInOneCascade) {
  auto m = instance(build_ultrasonic_motion_detector());
  m.enter();
  auto rep = m.dispatch({"motion", true});
  EXPECT_TRUE(m.is_active("ActuatingDevice"));
  EXPECT_EQ(count_raised(rep, "ActuatorTriggered"), 1u);
  EXPECT_THROW(build_physical_entity({}), TemplateError);
  try {
    build_physical_entity({"ultrasonic_sensor", "flux_capacitor"});
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.kind(), TemplateErrorKind::UnknownComponent);
  }
}

TEST(IotSystem, SevenRegionsAllOffAtEntry) {
  auto def = assemble_iot_system(lamp_base(), lamp_params("SmartLamp", 0.1));
  ASSERT_EQ(def.root.size(), 1u);
  const auto& top = def.root[0].states[0];
  std::vector<std::string> names;
  for (const auto& r : top.regions) names.push_back(r.name);
  EXPECT_EQ(names, iot_region_names());
  auto m = instance(def);
  auto cfg = m.enter().config_after;
  EXPECT_TRUE(m.is_active("DeviceSwitchStatus/off"));
  EXPECT_TRUE(m.is_active("Sensor/Off"));
  EXPECT_TRUE(m.is_active("WaitingforSensorData"));
  EXPECT_TRUE(m.is_active("StandBy"));
  EXPECT_TRUE(m.is_active("Network/Off"));
  EXPECT_TRUE(m.is_active("NoPowerConsumed"));
  EXPECT_TRUE(cfg.count("base/main/BaseLamp/r/Dark"));
}

TEST(IotSystem, MotionLightsLampAndOffResetsEverything) {
  auto m = instance(assemble_iot_system(lamp_base(), lamp_params("SmartLamp", 0.1)));
  m.enter();
  auto on = m.dispatch({"on", {}});
  ASSERT_FALSE(on.emitted.empty());
  EXPECT_TRUE(m.is_active("SensorMonitoring"));
  EXPECT_TRUE(m.is_active("ConsumingPower"));
  EXPECT_DOUBLE_EQ(m.read_var("draw_kw").as_real(), 0.1);
  m.dispatch({"motion", true});
  EXPECT_TRUE(m.find("base")->read_var("lit").as_bool());
  m.dispatch({"off", {}});
  EXPECT_TRUE(m.is_active("Sensor/Off"));
  EXPECT_TRUE(m.is_active("NoPowerConsumed"));
  EXPECT_TRUE(m.is_active("StandBy"));
  EXPECT_DOUBLE_EQ(m.read_var("draw_kw").as_real(), 0.0);
  EXPECT_FALSE(m.find("base")->read_var("lit").as_bool());
  EXPECT_TRUE(m.check_well_formed().empty());
}

TEST(PowerPolicy, TotalAndSelection) {
  EXPECT_DOUBLE_EQ(total_power({{false, 1.0}, {false, 2.0}}), 0.0);
  EXPECT_DOUBLE_EQ(total_power({{true, 0.1}, {true, 0.3}, {false, 1.2}}), 0.4);
  EXPECT_EQ(select_max_contributor({{"a", 0.5}, {"b", 1.2}, {"c", 0.9}}), "b");
  EXPECT_EQ(select_max_contributor({{"a", 0.7}, {"b", 0.7}}), "a");
  EXPECT_EQ(select_max_contributor({{"fire", 2.0, false}, {"tv", 0.2}, {"mw", 1.2}}), "mw");
  EXPECT_THROW(select_max_contributor({{"fire", 2.0, false}, {"tv", 0.0}}), TemplateError);
}

TEST(Hub, DuplicateIdsRejected) {
  HubSpec spec;
  spec.systems = {{"a", lamp_system("A", 1.0)}, {"a", lamp_system("B", 1.0)}};
  try {
    assemble_hub(spec);
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.kind(), TemplateErrorKind::DuplicateSystemId);
  }
}

TEST(Hub, AllOnAllOffSkipsNonToggleable) {
  HubSpec spec;
  spec.systems = {{"a", lamp_system("A", 0.5)}, {"b", lamp_system("B", 0.5)}, {"keep", lamp_system("K", 0.5), 0.5, false}};
  auto m = instance(assemble_hub(spec));
  m.enter();
  m.dispatch_to("keep", {"on", {}});
  m.advance_time(1000);
  m.dispatch({"HUBAllSystemsON", {}});
  EXPECT_TRUE(m.find("a")->read_var("on").as_bool());
  EXPECT_TRUE(m.find("b")->read_var("on").as_bool());
  EXPECT_NEAR(m.read_var("total_kw").as_real(), 1.5, 1e-12);
  m.advance_time(1000);
  m.dispatch({"HUBAllSystemsOFF", {}});
  EXPECT_FALSE(m.find("a")->read_var("on").as_bool());
  EXPECT_FALSE(m.find("b")->read_var("on").as_bool());
  EXPECT_TRUE(m.find("keep")->read_var("on").as_bool());
  EXPECT_TRUE(m.check_well_formed().empty());
}

TEST(Hub, ShedsLargestUntilUnderThreshold) {
  HubSpec spec;
  spec.power_threshold_kw = 2.0;
  spec.systems = {{"a", lamp_system("A", 0.9)}, {"b", lamp_system("B", 1.2)}, {"c", lamp_system("C", 0.8)}};
  auto m = instance(assemble_hub(spec));
  m.enter();
  std::vector<std::string> shed;
  auto collect = [&](const sc::StepReport& rep) {
    for (const auto& e : rep.emitted)
      if (e.kind == sc::Emission::Kind::Send && e.event == "shed") shed.push_back(e.to);
  };
  collect(m.dispatch({"toggle_a", {}}));
  collect(m.dispatch({"toggle_b", {}}));
  collect(m.advance_time(1000));
  collect(m.dispatch({"toggle_c", {}}));
  EXPECT_EQ(shed, (std::vector<std::string>{"b"}));
  EXPECT_FALSE(m.find("b")->read_var("on").as_bool());
  EXPECT_NEAR(m.read_var("total_kw").as_real(), 1.7, 1e-12);
  EXPECT_TRUE(m.is_active("PowerConsumptionCalculator"));
}

TEST(Hub, HubOfHubs) {
  HubSpec inner;
  inner.name = "LightsHub";
  inner.systems = {{"l1", lamp_system("L1", 0.01)}, {"l2", lamp_system("L2", 0.01)}};
  auto lights = std::make_shared<const sc::StatechartDef>(assemble_hub(inner));
  HubSpec outer;
  outer.name = "HomeHub";
  outer.systems = {{"lights", lights}, {"lamp", lamp_system("Lamp", 0.5)}};
  auto m = instance(assemble_hub(outer));
  m.enter();
  m.advance_time(1000);
  m.dispatch({"HUBAllSystemsON", {}});
  EXPECT_TRUE(m.find("lights/l1")->read_var("on").as_bool());
  EXPECT_TRUE(m.find("lights/l2")->read_var("on").as_bool());
  EXPECT_NEAR(m.read_var("total_kw").as_real(), 0.52, 1e-12);
}

TEST(Hub, AllOnShedsEachSystemOnce) {
  HubSpec spec;
  spec.power_threshold_kw = 1.0;
  spec.systems = {{"a", lamp_system("A", 0.25)}, {"b", lamp_system("B", 0.75)}, {"c", lamp_system("C", 0.5)}};
  auto m = instance(assemble_hub(spec));
  m.enter();
  m.advance_time(1000);
  std::vector<std::string> shed;
  for (const auto& e : m.dispatch({"HUBAllSystemsON", {}}).emitted)
    if (e.kind == sc::Emission::Kind::Send && e.event == "shed") shed.push_back(e.to);
  // 1.5 kW on; dropping b alone gets under 1.0
  EXPECT_EQ(shed, (std::vector<std::string>{"b"}));
  EXPECT_EQ(m.read_var("shed_count").as_int(), 1);
  EXPECT_NEAR(m.read_var("total_kw").as_real(), 0.75, 1e-12);
}
