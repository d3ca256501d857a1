#include <string>
#include <vector>

#include "hotspot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hotspot::cli_dispatch(args);
}
