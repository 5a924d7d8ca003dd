#include <iostream>
#include <string>
#include <vector>

#include "dmcv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dmcv::cli::run(args, std::cout, std::cerr);
}
