#include <iostream>
#include <string>
#include <vector>

#include "ptdelta/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ptdelta::cli::run_subcommand(args, std::cout, std::cerr);
}
