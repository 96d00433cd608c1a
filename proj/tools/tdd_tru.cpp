#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "tdd_tru/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tdd_tru::cli::Run(args, std::cout, std::cerr, std::getenv(tdd_tru::cli::kSeedEnvVar));
}
