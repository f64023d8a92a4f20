#include <iostream>
#include <string>
#include <vector>

#include "covdecomp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return covdecomp::run_cli(args, std::cout, std::cerr);
}
