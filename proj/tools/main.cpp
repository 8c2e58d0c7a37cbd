#include <iostream>

#include "mathsticks/cli.hpp"

int main(int argc, char** argv) {
  return mathsticks::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
