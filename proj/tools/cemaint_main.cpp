#include <iostream>
#include <string>
#include <vector>

#include "cemaint/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cemaint::cli::run_cli(args, std::cout, std::cerr);
}
