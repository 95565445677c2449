#include <iostream>

#include "gamma_glm/cli.hpp"

int main(int argc, char** argv) {
  return gamma_glm::run_cli(argc, argv, std::cout, std::cerr);
}
