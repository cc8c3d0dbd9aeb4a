#include <iostream>
#include <string>
#include <vector>

#include "qd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qd::cli::dispatch(args, std::cout, std::cerr, std::cin);
}
