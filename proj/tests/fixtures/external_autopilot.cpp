// Stand-in external autopilot for protocol tests.
//   external_autopilot cautious   brakes at 4 m/s^2 every step
//   external_autopilot garbage    answers with a non-JSON line
//   external_autopilot silent     exits without answering

#include <iostream>
#include <string>

#include <json.hpp>

int main(int argc, char** argv) {
  std::string mode = argc > 1 ? argv[1] : "cautious";
  if (mode == "silent") return 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "garbage") {
      std::cout << "hello there" << std::endl;
      continue;
    }
    auto msg = nlohmann::json::parse(line);
    double v = msg["ego"]["v"].get<double>();
    nlohmann::json out{{"mode", "cautious"}, {"command_accel", v > 0.0 ? -4.0 : 0.0}};
    std::cout << out.dump() << std::endl;
  }
  return 0;
}
