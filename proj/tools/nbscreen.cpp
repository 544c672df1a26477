#include <string>
#include <vector>

#include "nbscreen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nbscreen::cli::run(args);
}
