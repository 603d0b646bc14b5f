#include <string>
#include <vector>

#include "movingheat/cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return movingheat::cli::run(args);
}
