#include <string>
#include <vector>

#include "tempocomp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tempocomp::cli_dispatch(std::move(args));
}
