#include <iostream>

#include "dictminimax/cli.hpp"

int main(int argc, char** argv) {
  return dictminimax::run_cli(argc, argv, std::cout, std::cerr);
}
