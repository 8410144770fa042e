#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return costplan::cli::run(argc, argv, std::cout, std::cerr);
}
