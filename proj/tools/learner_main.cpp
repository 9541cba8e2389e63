#include <string>
#include <vector>

#include "learner/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return learner::cli::run_command(args);
}
