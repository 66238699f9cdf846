#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "stl4iot/home/library.hpp"
#include "stl4iot/sc/engine.hpp"
#include "stl4iot/sc/json_io.hpp"

using namespace stl4iot;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const sc::StatechartDef& lib(const std::string& name) {
  static const auto all = home::template_library();
  for (const auto& [n, d] : all)
    if (n == name) return d;
  throw std::out_of_range(name);
}

bool enters_at(const std::string& builder, const std::string& state) {
  sc::MachineInstance m(sc::validate_definition(lib(builder)));
  m.enter();
  return m.is_active(state);
}

}  // namespace

// Regenerate with: stl4iot-dump tests/golden
TEST(Golden, BuildersMatchReviewedFiles) {
  for (const auto& [name, def] : home::template_library()) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(sc::validate_definition(def));
    const std::string golden = slurp(std::string(STL4IOT_GOLDEN_DIR) + "/" + name + ".json");
    ASSERT_FALSE(golden.empty()) << "missing golden file";
    EXPECT_EQ(sc::dump_definition(def), golden);
    EXPECT_EQ(sc::dump_definition(sc::parse_definition(golden)), golden);
  }
}

TEST(Golden, DefaultEntryStates) {
  EXPECT_TRUE(enters_at("base_fire", "safe"));
  EXPECT_TRUE(enters_at("sensor", "NoActivitySensed"));
  EXPECT_TRUE(enters_at("controller", "WaitingforSensorData"));
  EXPECT_TRUE(enters_at("actuator", "StandBy"));
  EXPECT_TRUE(enters_at("power", "NoPowerConsumed"));
  EXPECT_TRUE(enters_at("network_wifi", "connectingToServer"));
}
