#include <iostream>

#include "cli.hpp"
#include "tain/runtime.hpp"

int main(int argc, char** argv) {
  tain::tune_allocator();
  return tain::cli::run(argc, argv, std::cout, std::cerr);
}
