#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  return thermal::cli::run_main(std::vector<std::string>(argv + 1, argv + argc));
}
