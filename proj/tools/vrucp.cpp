#include <iostream>

#include "vrucp/cli.hpp"

int main(int argc, char** argv) {
  return vrucp::cli::run_cli(argc, argv, std::cout, std::cerr);
}
