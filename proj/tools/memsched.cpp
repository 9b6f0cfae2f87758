#include <iostream>

#include "memsched/cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return memsched::run_cli(args, std::cout, std::cerr);
}
