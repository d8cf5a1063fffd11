#include <string>
#include <vector>

#include "hesscut/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hesscut::run_cli(args);
}
