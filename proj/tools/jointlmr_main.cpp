#include "jointlmr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return jointlmr::cli::run(argc, argv, std::cout, std::cerr);
}
