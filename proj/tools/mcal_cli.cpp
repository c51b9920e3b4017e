#include <iostream>
#include <string>
#include <vector>

#include "mcal/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mcal::run_command(args, std::cout, std::cerr);
}
