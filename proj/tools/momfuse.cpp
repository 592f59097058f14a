#include <iostream>

#include "mf/cli.h"

int main(int argc, char **argv) {
  return mf::cli::run(argc, argv, std::cout, std::cerr);
}
