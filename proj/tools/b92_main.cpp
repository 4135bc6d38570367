#include <iostream>
#include <string>
#include <vector>

#include "b92/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return b92::cli::run(args, std::cout, std::cerr);
}
