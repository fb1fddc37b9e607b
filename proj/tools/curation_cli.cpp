#include <iostream>
#include <string>
#include <vector>

#include "curation/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return curation::run_cli(args, std::cout, std::cerr);
}
