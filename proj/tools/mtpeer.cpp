#include <iostream>
#include <string>
#include <vector>

#include "mtpeer/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mtpeer::cli::run(args, std::cout, std::cerr);
}
