#include <string>
#include <vector>

#include "heurank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return heurank::cli::run(std::move(args));
}
