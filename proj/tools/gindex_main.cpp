#include <iostream>
#include <string>
#include <vector>

#include "gindex/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) args.push_back("--help");
  return gindex::cli::run(args, std::cerr);
}
