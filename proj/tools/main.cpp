#include <iostream>
#include <string>
#include <vector>

#include "conflens_cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  return conflens::cli::run(args, std::cout, std::cerr);
}
