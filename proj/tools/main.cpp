#include <iostream>

#include "cli.hpp"
#include "lowlight/parallel.hpp"

int main(int argc, char** argv) {
  lowlight::configure_threads_from_env();
  return lowlight::cli_main(argc, argv, std::cout, std::cerr);
}
