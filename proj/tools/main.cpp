#include <iostream>

#include "liqdem/cli.hpp"

int main(int argc, char** argv) {
  return liqdem::cli::run(argc, argv, std::cout, std::cerr);
}
