#include <iostream>
#include <string>
#include <vector>

#include "exactml/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return exactml::cli::run(args, std::cout, std::cerr);
}
