#include <iostream>

#include "routediag/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return routediag::run_cli(std::move(args), std::cout, std::cerr);
}
