// stl4iot-dump: writes each template at default parameters as <dir>/<name>.json.

#include <fstream>
#include <iostream>

#include "stl4iot/home/library.hpp"
#include "stl4iot/sc/json_io.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: stl4iot-dump <output-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  for (const auto& [name, def] : stl4iot::home::template_library()) {
    const std::string path = dir + "/" + name + ".json";
    std::ofstream f(path, std::ios::binary);
    f << stl4iot::sc::dump_definition(def);
    if (!f.flush()) {
      std::cerr << "stl4iot-dump: cannot write " << path << "\n";
      return 1;
    }
  }
  return 0;
}
